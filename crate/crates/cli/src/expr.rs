//! Combinator expressions naming predilators, preptykes, morphisms and
//! orders.
//!
//! ```text
//! ptyx  := succ | id | const:<pred> | sum(<ptyx>, …) | star(<ptyx>)
//!        | pipsi:<θ>:<n> | piplus:<θ>
//! pred  := omega | empty | <k> | fin:<k> | dpsi:<θ>:<n> | fixpoint(<ptyx>)
//!        | apply(<ptyx>, <pred>) | file:<path>
//! mor   := zeta:<θ>:<n> | pi(<pred>) | idm(<pred>)
//! order := fin:<k> | omega | kbwitness:<θ>:<n>[:empty|:all]
//! ```
//!
//! `sum` entries may carry their index, as in `sum(0:succ, 1:star(succ))`.
//! `θ` is `false`, `true`, `len` or a path to a decision table. A whole
//! expression that names an existing file is read as a fragment file.

use std::path::Path;

use ptykes::fix::{fixpoint, Fixpoint};
use ptykes::morph::{identity, Morphism};
use ptykes::orders::{finite, omega, succ_order, Order};
use ptykes::pi12::{d_psi, p_plus, theta_by_name, tz_order, zeta, SetOracle, ThetaOracle};
use ptykes::predil::{constant_predilator, decode_fragment, empty_predilator, omega_dilator, Predilator};
use ptykes::ptyx::{constant_ptyx, identity_ptyx, pi, succ_ptyx, sum_of, Preptyx};
use ptykes::{Error, Result};

/// A predilator together with what it was built from, where that matters
/// for probing.
#[derive(Clone)]
pub struct Pred {
    pub predilator: Predilator,
    pub fixpoint: Option<Fixpoint>,
    pub dpsi: Option<(ThetaOracle, u64)>,
}

impl Pred {
    fn plain(predilator: Predilator) -> Self {
        Pred { predilator, fixpoint: None, dpsi: None }
    }
}

pub enum Obj {
    Pred(Pred),
    Ptyx(Preptyx),
    Mor(Morphism),
}

pub enum Arg {
    Fin(usize),
    Order(Order),
    Witness { theta: ThetaOracle, n: u64, z: SetOracle, order: Order },
}

impl Arg {
    pub fn order(&self) -> Order {
        match self {
            Arg::Fin(k) => finite(*k),
            Arg::Order(x) | Arg::Witness { order: x, .. } => x.clone(),
        }
    }
}

fn err(msg: impl Into<String>) -> Error {
    Error::Parse(msg.into())
}

struct Cursor<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn skip_ws(&mut self) {
        let r = self.rest();
        self.pos += r.len() - r.trim_start().len();
    }

    fn eat(&mut self, prefix: &str) -> bool {
        self.skip_ws();
        if self.rest().starts_with(prefix) {
            self.pos += prefix.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, token: &str) -> Result<()> {
        if self.eat(token) {
            Ok(())
        } else {
            Err(err(format!("expected `{token}` at `{}`", self.rest())))
        }
    }

    /// A field running up to the next delimiter.
    fn word(&mut self) -> Result<&'a str> {
        self.skip_ws();
        let r = self.rest();
        let end = r.find([':', ',', '(', ')']).unwrap_or(r.len());
        let w = r[..end].trim_end();
        if w.is_empty() {
            return Err(err(format!("expected a name at `{r}`")));
        }
        self.pos += end;
        Ok(w)
    }

    fn number(&mut self) -> Result<u64> {
        let w = self.word()?;
        w.parse().map_err(|_| err(format!("expected a number, got `{w}`")))
    }

    fn theta(&mut self) -> Result<ThetaOracle> {
        theta_by_name(self.word()?)
    }

    fn done(&mut self) -> Result<()> {
        self.skip_ws();
        if self.rest().is_empty() {
            Ok(())
        } else {
            Err(err(format!("trailing input `{}`", self.rest())))
        }
    }

    fn ptyx(&mut self) -> Result<Preptyx> {
        if self.eat("succ") {
            Ok(succ_ptyx())
        } else if self.eat("const:") {
            Ok(constant_ptyx(&self.pred()?.predilator))
        } else if self.eat("sum(") {
            let mut parts = Vec::new();
            loop {
                let save = self.pos;
                if let Ok(z) = self.number() {
                    if self.eat(":") {
                        if z as usize != parts.len() {
                            return Err(err(format!("sum index {z} out of place")));
                        }
                    } else {
                        self.pos = save;
                    }
                } else {
                    self.pos = save;
                }
                parts.push(self.ptyx()?);
                if self.eat(")") {
                    break;
                }
                self.expect(",")?;
            }
            Ok(sum_of(parts).ptyx)
        } else if self.eat("star(") {
            let p = self.ptyx()?;
            self.expect(")")?;
            Ok(p.star())
        } else if self.eat("pipsi:") {
            let theta = self.theta()?;
            self.expect(":")?;
            Ok(theta.p_psi(self.number()?))
        } else if self.eat("piplus:") {
            Ok(p_plus(&self.theta()?).ptyx())
        } else if self.eat("id") {
            Ok(identity_ptyx())
        } else {
            Err(err(format!("expected a preptyx at `{}`", self.rest())))
        }
    }

    fn pred(&mut self) -> Result<Pred> {
        if self.eat("omega") {
            Ok(Pred::plain(omega_dilator()))
        } else if self.eat("empty") {
            Ok(Pred::plain(empty_predilator()))
        } else if self.eat("fin:") {
            Ok(Pred::plain(constant_predilator(finite(self.number()? as usize))))
        } else if self.eat("dpsi:") {
            let theta = self.theta()?;
            self.expect(":")?;
            let n = self.number()?;
            Ok(Pred { predilator: d_psi(&theta, n), fixpoint: None, dpsi: Some((theta, n)) })
        } else if self.eat("fixpoint(") {
            let p = self.ptyx()?;
            self.expect(")")?;
            let f = fixpoint(&p);
            Ok(Pred { predilator: f.predilator.clone(), fixpoint: Some(f), dpsi: None })
        } else if self.eat("apply(") {
            let p = self.ptyx()?;
            self.expect(",")?;
            let d = self.pred()?;
            self.expect(")")?;
            Ok(Pred::plain(p.apply_obj(&d.predilator)))
        } else if self.eat("file:") {
            let path = self.word()?;
            Ok(Pred::plain(read_fragment(Path::new(path))?))
        } else {
            let k = self.number().map_err(|_| err(format!("expected a predilator at `{}`", self.rest())))?;
            Ok(Pred::plain(constant_predilator(finite(k as usize))))
        }
    }

    fn mor(&mut self) -> Result<Option<Morphism>> {
        if self.eat("zeta:") {
            let theta = self.theta()?;
            self.expect(":")?;
            Ok(Some(zeta(&theta, self.number()?)))
        } else if self.eat("pi(") {
            let d = self.pred()?;
            self.expect(")")?;
            Ok(Some(pi(&d.predilator)))
        } else if self.eat("idm(") {
            let d = self.pred()?;
            self.expect(")")?;
            Ok(Some(identity(&d.predilator)))
        } else {
            Ok(None)
        }
    }
}

pub fn read_fragment(path: &Path) -> Result<Predilator> {
    let text = std::fs::read_to_string(path).map_err(|e| err(format!("{}: {e}", path.display())))?;
    Ok(decode_fragment(&text)?.predilator)
}

const PTYX_HEADS: [&str; 7] = ["succ", "id", "const:", "sum(", "star(", "pipsi:", "piplus:"];

pub fn parse_obj(src: &str) -> Result<Obj> {
    let path = Path::new(src.trim());
    if path.is_file() {
        return Ok(Obj::Pred(Pred::plain(read_fragment(path)?)));
    }
    let mut c = Cursor { src, pos: 0 };
    if let Some(m) = c.mor()? {
        c.done()?;
        return Ok(Obj::Mor(m));
    }
    c.skip_ws();
    let obj = if PTYX_HEADS.iter().any(|h| c.rest().starts_with(h)) {
        Obj::Ptyx(c.ptyx()?)
    } else {
        Obj::Pred(c.pred()?)
    };
    c.done()?;
    Ok(obj)
}

pub fn parse_pred(src: &str) -> Result<Pred> {
    match parse_obj(src)? {
        Obj::Pred(p) => Ok(p),
        _ => Err(err(format!("`{src}` is not a predilator"))),
    }
}

pub fn parse_ptyx(src: &str) -> Result<Preptyx> {
    match parse_obj(src)? {
        Obj::Ptyx(p) => Ok(p),
        _ => Err(err(format!("`{src}` is not a preptyx"))),
    }
}

pub fn parse_arg(src: &str) -> Result<Arg> {
    let mut c = Cursor { src, pos: 0 };
    let arg = if c.eat("fin:") {
        Arg::Fin(c.number()? as usize)
    } else if c.eat("omega") {
        Arg::Order(omega())
    } else if c.eat("kbwitness:") {
        let theta = c.theta()?;
        c.expect(":")?;
        let n = c.number()?;
        let z = if c.eat(":") {
            match c.word()? {
                "empty" => SetOracle::empty(),
                "all" => SetOracle::all(),
                w => return Err(err(format!("unknown set `{w}`"))),
            }
        } else {
            SetOracle::empty()
        };
        let order = succ_order(tz_order(&theta, n, &z));
        Arg::Witness { theta, n, z, order }
    } else {
        return Err(err(format!("expected an order at `{src}`")));
    };
    c.done()?;
    Ok(arg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_the_documented_forms() {
        for s in ["succ", "id", "const:1", "const:omega", "sum(succ, star(succ))", "sum(0:const:1,1:star(succ))", "pipsi:len:0", "piplus:len"] {
            assert!(matches!(parse_obj(s), Ok(Obj::Ptyx(_))), "{s}");
        }
        for s in ["omega", "empty", "3", "fin:2", "dpsi:len:1", "fixpoint(succ)", "apply(succ, omega)"] {
            assert!(matches!(parse_obj(s), Ok(Obj::Pred(_))), "{s}");
        }
        for s in ["zeta:len:0", "pi(omega)", "idm(fin:2)"] {
            assert!(matches!(parse_obj(s), Ok(Obj::Mor(_))), "{s}");
        }
        for s in ["fin:0", "omega", "kbwitness:len:1", "kbwitness:len:2:all"] {
            assert!(parse_arg(s).is_ok(), "{s}");
        }
    }

    #[test]
    fn rejects_garbage() {
        for s in ["", "succ)", "sum(succ", "sum(1:succ)", "star()", "dpsi:len", "fin:x", "bogus(1)"] {
            assert!(parse_obj(s).is_err(), "{s}");
        }
        for s in ["fin:", "kbwitness:len", "kbwitness:len:1:some", "succ"] {
            assert!(parse_arg(s).is_err(), "{s}");
        }
    }

    #[test]
    fn labels_follow_the_expression() {
        let p = parse_ptyx("star(succ)").unwrap();
        assert_eq!(p.label(), succ_ptyx().star().label());
        let d = parse_pred("dpsi:len:1").unwrap();
        assert_eq!(d.dpsi.as_ref().map(|(t, n)| (t.label().to_string(), *n)), Some(("len".into(), 1)));
    }
}
