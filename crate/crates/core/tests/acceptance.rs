//! The acceptance suite: one line per criterion, pass or fail.

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

use ptykes::extend::{eta, eta_inverse, ext_elem, extend, normal_form, ClassPredilator};
use ptykes::fix::{fixpoint, fixpoint_iso};
use ptykes::morph::{check_direct_limit, check_morphism, compose, empty_morphism, factor, identity, inclusion, support_system, Morphism, TraceSet};
use ptykes::orders::{finite, omega, succ_order, verify_chain};
use ptykes::pi12::{branch_witness, d_psi, kappa_chain, p_plus, theta_false, theta_len, tz_order, zeta, SetOracle};
use ptykes::predil::{check_predilator_laws, constant_predilator, empty_predilator, omega_dilator, OmegaClass, Predilator, TraceElem};
use ptykes::ptyx::{check_preptyx_laws, pi, plus_one, plus_one_mor, succ_ptyx, sum_of, Preptyx};
use ptykes::segll::{is_segment, iota_rho, SegmentWitness};
use ptykes::star::{iota_top, xi};
use ptykes::{stream, Elem};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok { Ok(()) } else { Err(msg()) }
}

fn within(start: Instant, limit: Duration) -> Result<Duration, String> {
    let t = start.elapsed();
    ensure(t < limit, || format!("took {t:.2?}, limit {limit:.0?}"))?;
    Ok(t)
}

fn fin(k: usize) -> Predilator {
    constant_predilator(finite(k))
}

fn samples() -> Vec<Predilator> {
    vec![empty_predilator(), fin(1), fin(2), omega_dilator()]
}

fn sample_ptykes() -> Vec<Preptyx> {
    let succ = succ_ptyx();
    vec![
        succ.clone(),
        succ.star(),
        sum_of(vec![succ.clone(), succ.star()]).ptyx,
        sum_of(vec![ptykes::ptyx::constant_ptyx(&fin(1)), succ.star()]).ptyx,
    ]
}

fn sample_morphisms() -> Vec<Morphism> {
    let (e, one, om) = (empty_predilator(), fin(1), omega_dilator());
    vec![
        empty_morphism(&e, &one),
        identity(&one),
        pi(&one),
        pi(&om),
        inclusion(&om, &TraceSet::finite(om.trace_window(3))),
    ]
}

fn law_suites() -> Outcome {
    let start = Instant::now();
    let (arity, budget) = (3, 40);
    let mut checks = 0;
    let mut audit = |rep: ptykes::predil::Report| -> Result<(), String> {
        checks += rep.checks;
        ensure(rep.is_clean(), || rep.to_string())
    };
    let mut preds = samples();
    for p in sample_ptykes() {
        preds.extend(samples().iter().map(|d| p.apply_obj(d)));
    }
    for d in &preds {
        audit(check_predilator_laws(d, arity, budget))?;
    }
    let mut mors = sample_morphisms();
    for p in sample_ptykes() {
        mors.extend(sample_morphisms().iter().map(|nu| p.apply_mor(nu)));
    }
    for m in &mors {
        audit(check_morphism(m, arity, budget))?;
    }
    for p in sample_ptykes() {
        audit(check_preptyx_laws(&p, &samples(), &sample_morphisms(), arity, budget))?;
    }
    let t = within(start, Duration::from_secs(120))?;
    Ok(format!("{} predilators, {} morphisms, 4 preptykes, {checks} checks, {t:.1?}", preds.len(), mors.len()))
}

fn normal_form_bijection() -> Outcome {
    let w = omega();
    let x = extend(&omega_dilator()).value(&w);
    let (prefix, _) = stream::take(&mut x.enumerate().unwrap(), 100, 1_000_000);
    ensure(prefix.len() == 100, || format!("only {} elements enumerated", prefix.len()))?;
    for e in &prefix {
        let s = eta(&OmegaClass, &w, e).map_err(|err| err.to_string())?;
        let back = eta_inverse(&OmegaClass, &w, &s).map_err(|err| err.to_string())?;
        ensure(&back == e, || format!("{e} ↦ {s} ↦ {back}"))?;
        let (a, k) = normal_form(&OmegaClass, &w, &s).map_err(|err| err.to_string())?;
        let again = eta(&OmegaClass, &w, &ext_elem(a, k.elem)).map_err(|err| err.to_string())?;
        ensure(again == s, || format!("{s} ↦ nf ↦ {again}"))?;
    }
    Ok("100 elements of ext(omega)(ω) round trip both ways".into())
}

fn library_morphisms() -> Vec<Morphism> {
    let (om, one) = (omega_dilator(), fin(1));
    let succ = succ_ptyx();
    let a = TraceSet::finite(om.trace_window(4));
    let a2 = TraceSet::finite(om.trace_window(2));
    let sum = sum_of(vec![succ.clone(), succ.star()]);
    let (fc, fwd, bwd) = fixpoint_iso(&ptykes::ptyx::constant_ptyx(&om), 10).unwrap();
    let fs = fixpoint(&succ);
    vec![
        identity(&om),
        pi(&om),
        pi(&one),
        empty_morphism(&empty_predilator(), &om),
        inclusion(&om, &a),
        factor(&inclusion(&om, &a2), &inclusion(&om, &a)).unwrap(),
        iota_rho(&om, &TraceElem::new(1, Elem::nats(&[0, 0]))),
        iota_top(&om).unwrap(),
        xi(&succ, &om).unwrap(),
        succ.apply_mor(&pi(&om)),
        succ.star().apply_mor(&pi(&om)),
        plus_one_mor(&pi(&one)),
        compose(&pi(&plus_one(&om)), &pi(&om)),
        sum.injection(&Elem::Nat(1), &om),
        fs.mu(2),
        fc.mu(1),
        fwd,
        bwd,
        zeta(&theta_len(), 0),
        zeta(&theta_len(), 1),
    ]
}

fn support_preservation() -> Outcome {
    let mors = library_morphisms();
    let mut checked = 0;
    for mu in &mors {
        let (d, e) = (mu.source(), mu.target());
        for n in 0..=3 {
            for x in d.window(n, 30) {
                let y = mu.component(n, &x);
                let (sx, sy) = (d.supp(n, &x), e.supp(n, &y));
                ensure(sx == sy, || format!("{}: supp({x}) = {sx:?}, supp({y}) = {sy:?}", mu.label()))?;
                checked += 1;
            }
        }
    }
    Ok(format!("{} morphisms, {checked} elements", mors.len()))
}

fn random_subset(rng: &mut StdRng, from: &[TraceElem], max: usize) -> Vec<TraceElem> {
    let k = rng.gen_range(0..=max.min(from.len()));
    let mut v: Vec<TraceElem> = from.choose_multiple(rng, k).cloned().collect();
    v.sort_by_key(|t| (t.arity, t.elem.code()));
    v
}

fn factorization() -> Outcome {
    let om = omega_dilator();
    let tr = om.trace_window(10);
    let mut rng = StdRng::seed_from_u64(0x5eed);
    for _ in 0..20 {
        let a = random_subset(&mut rng, &tr, 4);
        let a2 = random_subset(&mut rng, &a, 4);
        let (ia, ia2) = (inclusion(&om, &TraceSet::finite(a.clone())), inclusion(&om, &TraceSet::finite(a2.clone())));
        let nu = factor(&ia2, &ia).map_err(|e| format!("{a2:?} ⊆ {a:?}: {e}"))?;
        let rep = check_morphism(&nu, 3, 20);
        ensure(rep.is_clean(), || rep.to_string())?;
        let back = compose(&ia, &nu);
        for n in 0..=3 {
            for x in ia2.source().window(n, 20) {
                let (l, r) = (back.component(n, &x), ia2.component(n, &x));
                ensure(l == r, || format!("ι[A]∘ν({x}) = {l} but ι[A′]({x}) = {r}"))?;
            }
        }
    }
    let mut failures = 0;
    while failures < 10 {
        let a = random_subset(&mut rng, &tr, 4);
        let a2 = random_subset(&mut rng, &tr, 4);
        let Some(w) = a2.iter().find(|t| !a.contains(t)) else { continue };
        let (ia, ia2) = (inclusion(&om, &TraceSet::finite(a.clone())), inclusion(&om, &TraceSet::finite(a2.clone())));
        ensure(factor(&ia2, &ia).is_err(), || format!("{a2:?} ⊄ {a:?} but factor succeeded"))?;
        let y = ia2.component(w.arity, &w.elem);
        ensure(!ia.in_range(w.arity, &y), || format!("witness {w} is in the range of ι[A]"))?;
        failures += 1;
    }
    Ok("20 factorizations hold, 10 non-inclusions refused with witnesses".into())
}

fn direct_limits() -> Outcome {
    let mut names = Vec::new();
    for d in [omega_dilator(), fin(2)] {
        let r = check_direct_limit(&support_system(&d, 10), 10);
        ensure(r.holds, || format!("{}: {:?} {}", d.label(), r.uncovered, r.compatibility))?;
        names.push(d.label());
    }
    for p in [succ_ptyx(), succ_ptyx().star()] {
        let r = check_direct_limit(&fixpoint(&p).cocone(), 10);
        ensure(r.holds, || format!("D_{}: {:?} {}", p.label(), r.uncovered, r.compatibility))?;
        names.push(format!("D_{}", p.label()));
    }
    Ok(names.join(", "))
}

fn fixed_points() -> Outcome {
    let mut seen = 0;
    for p in [succ_ptyx(), ptykes::ptyx::constant_ptyx(&omega_dilator()), succ_ptyx().star()] {
        let (f, fwd, bwd) = fixpoint_iso(&p, 10).map_err(|e| e.to_string())?;
        let image = p.apply_obj(&f.predilator);
        for n in 0..=3 {
            for x in f.predilator.window(n, 25) {
                let back = bwd.component(n, &fwd.component(n, &x));
                ensure(back == x, || format!("{}: {x} ↦ {back}", p.label()))?;
                seen += 1;
            }
            for y in image.window(n, 25) {
                let back = fwd.component(n, &bwd.component(n, &y));
                ensure(back == y, || format!("{}: {y} ↦ {back}", p.label()))?;
                seen += 1;
            }
        }
    }
    Ok(format!("{seen} round trips (the fixpoint of star(succ) is empty)"))
}

fn non_dilator_witness() -> Outcome {
    let start = Instant::now();
    let f = fixpoint(&succ_ptyx());
    let wf = f.analyze_wf(&finite(0), 20, 100_000).map_err(|e| e.to_string())?;
    let x = extend(&f.predilator).value(&finite(0));
    ensure(wf.report.found && wf.report.chain.len() == 20, || "no chain of length 20".into())?;
    ensure(verify_chain(&x, &wf.report.chain), || "chain does not descend".into())?;
    let t = within(start, Duration::from_secs(1))?;
    Ok(format!("verified chain of length 20 in {t:.1?}"))
}

fn star_normality() -> Outcome {
    let (om, one) = (omega_dilator(), fin(1));
    let s = succ_ptyx().star();
    let segs = [
        pi(&one),
        pi(&om),
        identity(&om),
        iota_rho(&om, &TraceElem::new(1, Elem::nats(&[0, 0]))),
        empty_morphism(&empty_predilator(), &one),
    ];
    for nu in &segs {
        ensure(is_segment(nu, 2, 15).holds, || format!("{} is not a segment", nu.label()))?;
        let r = is_segment(&s.apply_mor(nu), 2, 15);
        ensure(r.holds, || format!("star(succ)({}): {:?}", nu.label(), r.witness))?;
    }
    let r = is_segment(&succ_ptyx().apply_mor(&segs[4]), 2, 10);
    let expected = SegmentWitness::Element { arity: 0, below: Elem::old(Elem::Nat(0)), above: Elem::Top };
    ensure(r.witness.as_ref() == Some(&expected), || format!("succ witness {:?}", r.witness))?;
    Ok(format!("5 segments kept, succ fails with {expected}"))
}

fn xi_naturality() -> Outcome {
    let p = succ_ptyx();
    let om = omega_dilator();
    let nus = [
        empty_morphism(&empty_predilator(), &fin(1)),
        pi(&fin(1)),
        inclusion(&om, &TraceSet::finite(om.trace_window(3))),
    ];
    let mut seen = 0;
    for nu in &nus {
        let (d, e) = (nu.source(), nu.target());
        let (xd, xe) = (xi(&p, &d).map_err(|e| e.to_string())?, xi(&p, &e).map_err(|e| e.to_string())?);
        let lhs = compose(&xe, &plus_one_mor(&p.apply_mor(nu)));
        let rhs = compose(&p.star().apply_mor(&plus_one_mor(nu)), &xd);
        for n in 0..=3 {
            for x in lhs.source().window(n, 20) {
                let (l, r) = (lhs.component(n, &x), rhs.component(n, &x));
                ensure(l == r, || format!("{} at {x}: {l} vs {r}", nu.label()))?;
                seen += 1;
            }
        }
    }
    Ok(format!("3 morphisms, {seen} elements"))
}

/// The sequence coded by `c`, for `c(⟨⟩) = 0`, `c(s⌢a) = ⟨c(s), a⟩ + 1`.
fn decode(mut c: u64) -> Vec<u64> {
    let mut out = Vec::new();
    while c > 0 {
        let z = c - 1;
        let w = (((8 * z + 1) as f64).sqrt() as u64 - 1) / 2;
        let w = (w.saturating_sub(2)..=w + 2).filter(|v| v * (v + 1) / 2 <= z).max().unwrap();
        let y = z - w * (w + 1) / 2;
        out.push(y);
        c = w - y;
    }
    out.reverse();
    out
}

fn kb_less(a: &[u64], b: &[u64]) -> bool {
    match a.iter().zip(b).find(|(x, y)| x != y) {
        Some((x, y)) => x < y,
        None => a.len() > b.len(),
    }
}

/// Every `s×t` with entries in `2×k` satisfying the monotonicity clause,
/// found by walking the tree of sequences. The clause only gains
/// constraints as sequences grow, so a failing node has no valid children.
fn walk(k: u64, cur: &mut Vec<(u64, u64)>, out: &mut BTreeSet<Vec<(u64, u64)>>) {
    let len = cur.len();
    let idx: Vec<Vec<u64>> = (0..len as u64).map(decode).collect();
    let ok = (0..len).all(|i| {
        (0..len).all(|j| {
            let tree = idx[i].len() <= len && idx[j].len() <= len;
            !(tree && kb_less(&idx[i], &idx[j])) || cur[i].1 < cur[j].1
        })
    });
    if !ok {
        return;
    }
    out.insert(cur.clone());
    for s in 0..2 {
        for t in 0..k {
            cur.push((s, t));
            walk(k, cur, out);
            cur.pop();
        }
    }
}

fn finite_exhaustion() -> Outcome {
    const FROZEN: [usize; 4] = [1, 3, 9, 27];
    let mut found = Vec::new();
    for k in 0..=3u64 {
        let mut oracle = BTreeSet::new();
        walk(k, &mut Vec::new(), &mut oracle);
        ensure(oracle.len() == FROZEN[k as usize], || format!("oracle gives {} at k = {k}", oracle.len()))?;
        for n in 0..=2 {
            let d = d_psi(&theta_false(), n);
            let (all, done) = stream::take(&mut d.elements(k as usize), 1000, 1_000_000);
            ensure(done, || format!("D^{n}(finite {k}) did not end"))?;
            let got: BTreeSet<Vec<(u64, u64)>> = all
                .iter()
                .map(|e| {
                    e.as_seq()
                        .unwrap()
                        .iter()
                        .map(|p| {
                            let (s, t) = p.as_pair().unwrap();
                            (s.as_nat().unwrap(), t.as_nat().unwrap())
                        })
                        .collect()
                })
                .collect();
            ensure(got == oracle, || format!("D^{n}(finite {k}) differs from the tree walk"))?;
        }
        found.push(oracle.len());
    }
    Ok(format!("cardinalities {found:?} for n ≤ 2"))
}

/// `s×t ↦ (a, s×ranks)` with `a` the entries of `t`, sorted.
fn to_extension(x: &ptykes::orders::Order, e: &Elem) -> Elem {
    let (s, t): (Vec<Elem>, Vec<Elem>) =
        e.as_seq().unwrap().iter().map(|p| p.as_pair().unwrap()).map(|(a, b)| (a.clone(), b.clone())).unzip();
    let mut a = t.clone();
    a.sort_by(|u, v| x.compare(u, v));
    a.dedup();
    let kernel = s
        .into_iter()
        .zip(&t)
        .map(|(si, ti)| Elem::pair(si, Elem::Nat(a.iter().position(|v| v == ti).unwrap() as u64)))
        .collect();
    ext_elem(a, Elem::seq(kernel))
}

fn ill_foundedness() -> Outcome {
    let th = theta_len();
    for n in 0..=2 {
        for z in [SetOracle::empty(), SetOracle::all()] {
            let w = branch_witness(&th, n, &z, 30).map_err(|e| e.to_string())?;
            ensure(w.chain.len() == 30, || format!("chain of length {}", w.chain.len()))?;
            ensure(verify_chain(&w.order, &w.chain), || format!("n = {n}: chain does not descend"))?;
            let x = succ_order(tz_order(&th, n, &z));
            let ext = extend(&d_psi(&th, n)).value(&x);
            let pushed: Vec<Elem> = w.chain.iter().map(|e| to_extension(&x, e)).collect();
            ensure(verify_chain(&ext, &pushed), || format!("n = {n}: normal forms do not descend"))?;
        }
    }
    Ok("length 30 for n ≤ 2, Z ∈ {∅, ℕ}, also through normal forms".into())
}

fn kappa() -> Outcome {
    let start = Instant::now();
    let pp = p_plus(&theta_len());
    let (fix, _fwd, chi) = fixpoint_iso(&pp.ptyx(), 8).map_err(|e| e.to_string())?;
    let e = fix.predilator.clone();
    let ks = kappa_chain(&pp, &e, &chi, 1, 2, 8).map_err(|e| e.to_string())?;
    ensure(ks.len() == 2, || format!("{} maps", ks.len()))?;
    let mut checks = 0;
    for k in &ks {
        let rep = check_morphism(k, 2, 8);
        ensure(rep.is_clean(), || rep.to_string())?;
        let moved = (0..=2).map(|n| k.source().window(n, 8).len()).sum::<usize>();
        ensure(moved > 0, || format!("{} has an empty window", k.label()))?;
        checks += rep.checks;
    }
    let t = within(start, Duration::from_secs(300))?;
    Ok(format!("κ⁰ and κ¹ audited, {checks} checks, {t:.1?}"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 12] = [
        ("law suites", law_suites),
        ("normal-form bijection", normal_form_bijection),
        ("support preservation", support_preservation),
        ("factorization", factorization),
        ("direct limits", direct_limits),
        ("fixed point isomorphism", fixed_points),
        ("non-dilator witness", non_dilator_witness),
        ("normality of star", star_normality),
        ("ξ naturality", xi_naturality),
        ("finite exhaustion", finite_exhaustion),
        ("ill-foundedness", ill_foundedness),
        ("κ-chain", kappa),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("[{:>2}] PASS  {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("[{:>2}] FAIL  {name}: {why}", i + 1);
            }
        }
    }
    println!("{} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE }
}
