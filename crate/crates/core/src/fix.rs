//! Fixed points of preptykes: the iterates `D^{n+1} = P(D^n)`, their direct
//! limit `D_P`, the cocone `μ^k` and the isomorphism `D_P ≅ P(D_P)`.

use std::cmp::Ordering;
use std::sync::{Arc, Mutex};

use crate::error::{Error, Result};
use crate::extend::{dilator_probe, ext_parts};
use crate::finord::FinEmbedding;
use crate::morph::{compose, empty_morphism, identity, mediate, DirectSystem, Morphism, MorphismImpl};
use crate::orders::{DescentReport, Order};
use crate::predil::{check_predilator_laws, empty_predilator, Predilator, PredilatorImpl, Report};
use crate::ptyx::Preptyx;
use crate::stream::{self, Stream};
use crate::Elem;

#[derive(Default)]
struct Stages {
    objs: Vec<Predilator>,
    steps: Vec<Morphism>,
}

/// The iterates of a preptyx, built on demand and cached.
pub struct Iteration {
    p: Preptyx,
    stages: Mutex<Stages>,
}

impl Iteration {
    pub fn new(p: &Preptyx) -> Arc<Self> {
        let d0 = empty_predilator();
        let d1 = p.apply_obj(&d0);
        let nu0 = empty_morphism(&d0, &d1);
        Arc::new(Iteration { p: p.clone(), stages: Mutex::new(Stages { objs: vec![d0, d1], steps: vec![nu0] }) })
    }

    pub fn preptyx(&self) -> &Preptyx {
        &self.p
    }

    fn grow(&self, m: usize) {
        let mut st = self.stages.lock().unwrap();
        while st.steps.len() <= m {
            let nu = self.p.apply_mor(st.steps.last().expect("ν⁰"));
            debug_assert_eq!(nu.source().id(), st.objs.last().expect("stage").id());
            st.objs.push(nu.target());
            st.steps.push(nu);
        }
    }

    /// `D^m_P`.
    pub fn stage(&self, m: usize) -> Predilator {
        self.grow(m);
        self.stages.lock().unwrap().objs[m].clone()
    }

    /// `ν^m: D^m_P ⇒ D^{m+1}_P`.
    pub fn step(&self, m: usize) -> Morphism {
        self.grow(m);
        self.stages.lock().unwrap().steps[m].clone()
    }

    /// `ν^{mk} = ν^{k−1} ∘ … ∘ ν^m` for `m ≤ k`.
    pub fn nu(&self, m: usize, k: usize) -> Morphism {
        assert!(m <= k, "ν^{{{m}{k}}} needs m ≤ k");
        let mut acc = identity(&self.stage(m));
        for j in m..k {
            acc = compose(&self.step(j), &acc);
        }
        acc
    }

    /// `ν^{mk}_n(σ)` without building the composite.
    pub fn lift(&self, n: usize, m: usize, k: usize, x: &Elem) -> Elem {
        (m..k).fold(x.clone(), |y, j| self.step(j).component(n, &y))
    }

    /// The least `m ≤ k` with `σ ∈ rng ν^{mk}`, with the preimage.
    pub fn origin(&self, n: usize, k: usize, x: &Elem) -> (usize, Elem) {
        let (mut m, mut y) = (k, x.clone());
        while m > 0 {
            match self.step(m - 1).preimage(n, &y) {
                Some(z) => {
                    m -= 1;
                    y = z;
                }
                None => break,
            }
        }
        (m, y)
    }

    /// Audit of stages `1..=n` on a small window.
    pub fn audit(&self, n: usize, arity_bound: usize, elem_budget: usize) -> Report {
        let mut rep = Report::new(format!("stages of {}", self.p.label()));
        for m in 1..=n {
            rep.absorb(check_predilator_laws(&self.stage(m), arity_bound, elem_budget));
        }
        rep
    }
}

/// Builds `D^0, …, D^n` and audits stages `1..=n`, as the recursion assumes
/// each earlier stage is lawful.
pub fn iterate(p: &Preptyx, n: usize) -> Result<Arc<Iteration>> {
    let it = Iteration::new(p);
    let rep = it.audit(n, 1, 8);
    if !rep.is_clean() {
        return Err(Error::Verification(rep.to_string()));
    }
    Ok(it)
}

fn split(x: &Elem) -> Option<(usize, &Elem)> {
    let (m, s) = x.as_pair()?;
    Some((m.as_nat()? as usize, s))
}

fn tag(m: usize, x: Elem) -> Elem {
    Elem::pair(Elem::Nat(m as u64), x)
}

struct FixObj(Arc<Iteration>);

impl PredilatorImpl for FixObj {
    fn label(&self) -> String {
        format!("fixpoint({})", self.0.p.label())
    }
    fn contains(&self, n: usize, x: &Elem) -> bool {
        let Some((m, s)) = split(x) else { return false };
        m >= 1 && self.0.stage(m).contains(n, s) && !self.0.step(m - 1).in_range(n, s)
    }
    fn compare(&self, n: usize, x: &Elem, y: &Elem) -> Ordering {
        let ((m, s), (l, t)) = (split(x).expect("fixpoint element"), split(y).expect("fixpoint element"));
        let k = m.max(l);
        self.0.stage(k).compare(n, &self.0.lift(n, m, k, s), &self.0.lift(n, l, k, t))
    }
    fn act(&self, f: &FinEmbedding, x: &Elem) -> Elem {
        let (m, s) = split(x).expect("fixpoint element");
        tag(m, self.0.stage(m).act(f, s))
    }
    fn supp(&self, n: usize, x: &Elem) -> Vec<usize> {
        let (m, s) = split(x).expect("fixpoint element");
        self.0.stage(m).supp(n, s)
    }
    fn preimage(&self, f: &FinEmbedding, y: &Elem) -> Option<Elem> {
        let (m, t) = split(y)?;
        Some(tag(m, self.0.stage(m).preimage(f, t)?))
    }
    /// Stages are opened one per round and filtered to the new elements.
    fn elements(&self, n: usize) -> Stream {
        let it = self.0.clone();
        let outer = stream::map(stream::from_iter(1usize..), move |m| {
            let it2 = it.clone();
            stream::filter_map(it.stage(m).elements(n), move |s| {
                (!it2.step(m - 1).in_range(n, &s)).then(|| tag(m, s))
            })
        });
        stream::dovetail(outer)
    }
}

/// The fixed point `D_P` together with its iteration.
#[derive(Clone)]
pub struct Fixpoint {
    pub predilator: Predilator,
    pub iteration: Arc<Iteration>,
}

/// `D_P`, the direct limit of the iterates.
pub fn fixpoint(p: &Preptyx) -> Fixpoint {
    let iteration = Iteration::new(p);
    Fixpoint { predilator: Predilator::new(FixObj(iteration.clone())), iteration }
}

struct Mu {
    it: Arc<Iteration>,
    k: usize,
    target: Predilator,
    normal: bool,
}

impl MorphismImpl for Mu {
    fn label(&self) -> String {
        format!("μ^{}", self.k)
    }
    fn source(&self) -> Predilator {
        self.it.stage(self.k)
    }
    fn target(&self) -> Predilator {
        self.target.clone()
    }
    fn component(&self, n: usize, x: &Elem) -> Elem {
        let (m, y) = self.it.origin(n, self.k, x);
        tag(m, y)
    }
    fn preimage(&self, n: usize, y: &Elem) -> Option<Elem> {
        let (m, s) = split(y)?;
        (m >= 1 && m <= self.k && self.target.contains(n, y)).then(|| self.it.lift(n, m, self.k, s))
    }
    fn segment_by_construction(&self) -> bool {
        self.normal
    }
}

impl Fixpoint {
    /// `μ^k: D^k_P ⇒ D_P`, sending `σ` to `(m, σ₀)` for the least `m` with
    /// `σ = ν^{mk}(σ₀)`.
    pub fn mu(&self, k: usize) -> Morphism {
        Morphism::new(Mu {
            it: self.iteration.clone(),
            k,
            target: self.predilator.clone(),
            normal: self.iteration.p.normal_by_construction(),
        })
    }

    /// The cocone `{μ^k}` over all stages, index `i` being stage `i`.
    pub fn cocone(&self) -> DirectSystem {
        let (me, it) = (self.clone(), self.iteration.clone());
        DirectSystem::new(format!("{{μ^k}} of {}", self.predilator.label()), self.predilator.clone(), None, move |k| {
            me.mu(k)
        })
        .with_transitions(move |m, k| (m <= k).then(|| it.nu(m, k)))
    }

    /// The cocone over stages `≥ 1`, index `i` being stage `i + 1`.
    fn shifted(&self) -> DirectSystem {
        let me = self.clone();
        DirectSystem::new(format!("{{μ^(k+1)}} of {}", self.predilator.label()), self.predilator.clone(), None, move |i| {
            me.mu(i + 1)
        })
    }

    /// `{P(μ^k)}`: the image cocone into `P(D_P)`, over the same stages.
    fn image(&self) -> DirectSystem {
        let (me, p) = (self.clone(), self.iteration.p.clone());
        DirectSystem::new(
            format!("{}({{μ^k}})", p.label()),
            p.apply_obj(&self.predilator),
            None,
            move |i| p.apply_mor(&me.mu(i)),
        )
    }

    /// Mutually inverse `D_P ⇒ P(D_P)` and `P(D_P) ⇒ D_P`, mediating between
    /// the cocone over stages `≥ 1` and its image under `P`.
    pub fn iso(&self, trace_window: usize) -> Result<(Morphism, Morphism)> {
        let (a, b) = (self.shifted(), self.image());
        Ok((mediate(&a, &b, trace_window)?, mediate(&b, &a, trace_window)?))
    }

    /// Descent probe on `\bar D_P(X)`, with the chain pushed down the cocone.
    pub fn analyze_wf(&self, x: &Order, len: usize, budget: usize) -> Result<WfReport> {
        let report = dilator_probe(&self.predilator, x, len, budget)?;
        let stages: Vec<usize> = report
            .chain
            .iter()
            .map(|e| {
                let (_, k) = ext_parts(e).expect("extension element");
                split(k).expect("fixpoint element").0
            })
            .collect();
        let escaping = stages.len() > 1 && stages.windows(2).all(|w| w[0] < w[1]);
        let localized_at = (!escaping).then(|| stages.iter().copied().max()).flatten();
        Ok(WfReport { report, stages, localized_at })
    }
}

/// A descent probe on `\bar D_P(X)` with the stage of each chain element.
#[derive(Clone, Debug)]
pub struct WfReport {
    pub report: DescentReport,
    /// The stage `m` of the kernel `(m, σ)` of each chain element.
    pub stages: Vec<usize>,
    /// The least stage `n` with the whole chain in the range of `\bar μ^n`,
    /// unless every element needs a new stage.
    pub localized_at: Option<usize>,
}

/// `D_P ≅ P(D_P)`.
pub fn fixpoint_iso(p: &Preptyx, trace_window: usize) -> Result<(Fixpoint, Morphism, Morphism)> {
    let f = fixpoint(p);
    let (fwd, bwd) = f.iso(trace_window)?;
    Ok((f, fwd, bwd))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::morph::{check_direct_limit, check_morphism};
    use crate::orders::{dump_prefix, finite, omega, verify_chain};
    use crate::predil::{constant_predilator, omega_dilator};
    use crate::ptyx::{constant_ptyx, succ_ptyx};
    use crate::segll::is_segment;

    #[test]
    fn succ_stages_are_finite_orders() {
        let it = iterate(&succ_ptyx(), 4).unwrap();
        for m in 0..5 {
            for n in 0..3 {
                assert_eq!(it.stage(m).window(n, 20).len(), m);
            }
        }
        let id = it.nu(2, 2);
        assert_eq!(id.component(0, &Elem::Top), Elem::Top);
    }

    #[test]
    fn succ_fixpoint_is_reverse_omega() {
        let f = fixpoint(&succ_ptyx());
        let v = f.predilator.value(0);
        let dump = dump_prefix(&v, 3, 10_000).unwrap();
        assert_eq!(dump.lines().count(), 3);
        let w = f.predilator.window(0, 5);
        assert_eq!(w[0], tag(1, Elem::Top));
        assert_eq!(w[1], tag(2, Elem::old(Elem::Top)));
        assert!(verify_chain(&v, &w));
        let r = crate::orders::probe_descent(&v, 20, 100_000).unwrap();
        assert!(r.found && verify_chain(&v, &r.chain));
        assert!(check_predilator_laws(&f.predilator, 2, 20).is_clean());
    }

    #[test]
    fn cocone_minimality() {
        let f = fixpoint(&succ_ptyx());
        let mu2 = f.mu(2);
        assert_eq!(mu2.component(0, &Elem::old(Elem::Top)), tag(2, Elem::old(Elem::Top)));
        assert_eq!(mu2.component(0, &Elem::Top), tag(1, Elem::Top));
        assert!(f.mu(0).source().window(1, 5).is_empty());
        for k in 0..4 {
            assert!(check_morphism(&f.mu(k), 2, 10).is_clean());
            for m in 0..=k {
                let lhs = compose(&f.mu(k), &f.iteration.nu(m, k));
                for x in f.iteration.stage(m).window(1, 10) {
                    assert_eq!(lhs.component(1, &x), f.mu(m).component(1, &x));
                }
            }
        }
        assert!(check_direct_limit(&f.cocone(), 10).holds);
    }

    #[test]
    fn constant_fixpoint() {
        let d0 = omega_dilator();
        let f = fixpoint(&constant_ptyx(&d0));
        for x in f.predilator.window(2, 15) {
            assert_eq!(split(&x).unwrap().0, 1);
        }
        assert!(check_predilator_laws(&f.predilator, 2, 20).is_clean());
        let (fwd, bwd) = f.iso(10).unwrap();
        for x in f.predilator.window(2, 25) {
            let y = fwd.component(2, &x);
            assert_eq!(&y, split(&x).unwrap().1);
            assert_eq!(bwd.component(2, &y), x);
        }
        assert!(check_direct_limit(&f.cocone(), 10).holds);
        for k in 1..4 {
            assert!(is_segment(&f.mu(k), 2, 15).holds);
        }
        let wf = f.analyze_wf(&finite(2), 5, 20_000).unwrap();
        assert!(!wf.report.found);
    }

    #[test]
    fn succ_iso_shifts_stages() {
        let f = fixpoint(&succ_ptyx());
        let (fwd, bwd) = f.iso(10).unwrap();
        for n in 0..3 {
            for x in f.predilator.window(n, 25) {
                let y = fwd.component(n, &x);
                assert_eq!(bwd.component(n, &y), x);
            }
        }
        // (1,⊤) ↦ ⊤ and (m+1, ↑σ) ↦ ↑(m, σ)
        assert_eq!(fwd.component(0, &tag(1, Elem::Top)), Elem::Top);
        assert_eq!(fwd.component(0, &tag(2, Elem::old(Elem::Top))), Elem::old(tag(1, Elem::Top)));
        assert!(check_morphism(&fwd, 1, 10).is_clean());
        assert!(check_morphism(&bwd, 1, 10).is_clean());
    }

    #[test]
    fn succ_chains_escape_every_stage() {
        let f = fixpoint(&succ_ptyx());
        let wf = f.analyze_wf(&finite(0), 20, 100_000).unwrap();
        assert!(wf.report.found);
        assert_eq!(wf.localized_at, None);
        let c = fixpoint(&constant_ptyx(&constant_predilator(finite(1))));
        assert!(!c.analyze_wf(&omega(), 3, 20_000).unwrap().report.found);
    }

    #[test]
    fn star_succ_fixpoint_is_empty() {
        let f = fixpoint(&succ_ptyx().star());
        for n in 0..3 {
            assert!(f.predilator.window(n, 10).is_empty());
        }
        assert!(check_direct_limit(&f.cocone(), 10).holds);
        let (fwd, bwd) = f.iso(10).unwrap();
        assert!(check_morphism(&fwd, 2, 10).is_clean() && check_morphism(&bwd, 2, 10).is_clean());
        assert!(!f.analyze_wf(&finite(3), 15, 20_000).unwrap().report.found);
    }
}
