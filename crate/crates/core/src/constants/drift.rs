//! Drift functions `f_i` entering the Piterbarg constants.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `c |t|^gamma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerTerm {
    pub c: f64,
    pub gamma: f64,
}

#[derive(Clone)]
pub struct UserDrift {
    pub name: String,
    pub f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    /// Declared to increase to infinity on both sides.
    pub coercive: bool,
}

impl fmt::Debug for UserDrift {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "UserDrift({}, coercive={})", self.name, self.coercive)
    }
}

#[derive(Debug, Clone)]
pub enum Drift {
    Zero,
    /// `c |t|^gamma`, two-sided.
    PowerLaw { c: f64, gamma: f64 },
    /// `sum_k c_k |t|^gamma_k`, two-sided.
    PowerSum(Vec<PowerTerm>),
    /// `c t`, meant for intervals inside `[0, inf)`.
    LinearPositive { c: f64 },
    User(UserDrift),
}

/// Which unbounded interval a limit constant refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    /// `[0, inf)`
    Positive,
    /// `(-inf, inf)`
    Both,
}

impl Drift {
    pub fn user(name: impl Into<String>, coercive: bool, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Drift::User(UserDrift {
            name: name.into(),
            f: Arc::new(f),
            coercive,
        })
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Drift::Zero => 0.0,
            Drift::PowerLaw { c, gamma } => c * t.abs().powf(*gamma),
            Drift::PowerSum(terms) => terms.iter().map(|p| p.c * t.abs().powf(p.gamma)).sum(),
            Drift::LinearPositive { c } => c * t,
            Drift::User(u) => (u.f)(t),
        }
    }

    /// Power terms, if the drift is a finite sum of two-sided power laws.
    /// `LinearPositive` is included: on `t >= 0` it is `c |t|^1`.
    pub fn power_terms(&self) -> Option<Vec<PowerTerm>> {
        match self {
            Drift::Zero => Some(Vec::new()),
            Drift::PowerLaw { c, gamma } => Some(vec![PowerTerm { c: *c, gamma: *gamma }]),
            Drift::PowerSum(terms) => Some(terms.clone()),
            Drift::LinearPositive { c } => Some(vec![PowerTerm { c: *c, gamma: 1.0 }]),
            Drift::User(_) => None,
        }
    }

    /// `factor * f`.
    pub fn scaled(&self, factor: f64) -> Drift {
        match self {
            Drift::Zero => Drift::Zero,
            _ if factor == 0.0 => Drift::Zero,
            Drift::PowerLaw { c, gamma } => Drift::PowerLaw { c: c * factor, gamma: *gamma },
            Drift::PowerSum(terms) => Drift::PowerSum(
                terms.iter().map(|p| PowerTerm { c: p.c * factor, gamma: p.gamma }).collect(),
            ),
            Drift::LinearPositive { c } => Drift::LinearPositive { c: c * factor },
            Drift::User(u) => {
                let f = u.f.clone();
                Drift::User(UserDrift {
                    name: format!("{}*{}", factor, u.name),
                    f: Arc::new(move |t| factor * f(t)),
                    coercive: u.coercive && factor > 0.0,
                })
            }
        }
    }

    /// Whether `f(t) -> inf` as `|t| -> inf` on the unbounded end(s) of `side`.
    pub fn is_coercive(&self, side: Side) -> bool {
        let leading = |terms: &[PowerTerm]| {
            terms
                .iter()
                .filter(|p| p.c != 0.0)
                .max_by(|a, b| a.gamma.total_cmp(&b.gamma))
                .is_some_and(|p| p.c > 0.0)
        };
        match self {
            Drift::Zero => false,
            Drift::PowerLaw { c, .. } => *c > 0.0,
            Drift::PowerSum(terms) => leading(terms),
            Drift::LinearPositive { c } => *c > 0.0 && side == Side::Positive,
            Drift::User(u) => u.coercive,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let check = |c: f64, gamma: f64| {
            if c.is_finite() && gamma.is_finite() && gamma > 0.0 {
                Ok(())
            } else {
                Err(Error::domain(format!("power drift needs finite c and gamma > 0, got c={c}, gamma={gamma}")))
            }
        };
        match self {
            Drift::Zero | Drift::User(_) => Ok(()),
            Drift::PowerLaw { c, gamma } => check(*c, *gamma),
            Drift::PowerSum(terms) => terms.iter().try_for_each(|p| check(p.c, p.gamma)),
            Drift::LinearPositive { c } => check(*c, 1.0),
        }
    }

    /// Stable identifier used in cache keys and CSV output.
    pub fn id(&self) -> String {
        match self {
            Drift::Zero => "zero".into(),
            Drift::PowerLaw { c, gamma } => format!("pow({c:e},{gamma:e})"),
            Drift::PowerSum(terms) => {
                let parts: Vec<String> = terms.iter().map(|p| format!("{:e},{:e}", p.c, p.gamma)).collect();
                format!("powsum({})", parts.join(";"))
            }
            Drift::LinearPositive { c } => format!("lin({c:e})"),
            Drift::User(u) => format!("user({})", u.name),
        }
    }
}

/// Drift vector `(f_1, ..., f_n)`.
#[derive(Debug, Clone)]
pub struct DriftSpec {
    pub coords: Vec<Drift>,
}

impl DriftSpec {
    pub fn new(coords: Vec<Drift>) -> Self {
        Self { coords }
    }

    pub fn zero(n: usize) -> Self {
        Self { coords: vec![Drift::Zero; n] }
    }

    pub fn n(&self) -> usize {
        self.coords.len()
    }

    pub fn sum(&self, t: f64) -> f64 {
        self.coords.iter().map(|f| f.eval(t)).sum()
    }

    /// `(factor_i f_i)_i`.
    pub fn scaled(&self, factors: &[f64]) -> DriftSpec {
        DriftSpec {
            coords: self.coords.iter().zip(factors).map(|(f, &k)| f.scaled(k)).collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (i, f) in self.coords.iter().enumerate() {
            f.validate().map_err(|e| e.at_coordinate(i))?;
            let f0 = f.eval(0.0);
            if f0.abs() > 1e-12 {
                return Err(Error::domain(format!("drift must vanish at 0, got f(0) = {f0}")).at_coordinate(i));
            }
        }
        Ok(())
    }

    /// The sum drift `sum_i f_i` tends to infinity on the unbounded side(s).
    pub fn is_coercive(&self, side: Side) -> bool {
        self.coords.iter().any(|f| f.is_coercive(side))
            && self.coords.iter().all(|f| matches!(f, Drift::Zero) || f.is_coercive(side) || bounded_below(f, side))
    }

    pub fn id(&self) -> String {
        self.coords.iter().map(Drift::id).collect::<Vec<_>>().join("|")
    }
}

fn bounded_below(f: &Drift, side: Side) -> bool {
    match f {
        Drift::LinearPositive { c } => *c >= 0.0 && side == Side::Positive,
        Drift::PowerLaw { c, .. } => *c >= 0.0,
        Drift::PowerSum(terms) => terms.iter().all(|p| p.c >= 0.0),
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn evaluation() {
        assert_eq!(Drift::PowerLaw { c: 2.0, gamma: 1.5 }.eval(-4.0), 16.0);
        assert_eq!(Drift::LinearPositive { c: 0.5 }.eval(3.0), 1.5);
        let s = Drift::PowerSum(vec![PowerTerm { c: 1.0, gamma: 2.0 }, PowerTerm { c: -1.0, gamma: 1.0 }]);
        assert_eq!(s.eval(-3.0), 6.0);
        assert_eq!(Drift::user("sq", true, |t| t * t).scaled(3.0).eval(2.0), 12.0);
    }

    #[test]
    fn vanishing_at_origin_is_enforced() {
        let bad = DriftSpec::new(vec![Drift::Zero, Drift::user("shifted", true, |t| 1.0 + t * t)]);
        assert!(matches!(bad.validate(), Err(Error::Coordinate { index: 1, .. })));
        let bad = DriftSpec::new(vec![Drift::PowerLaw { c: 1.0, gamma: -1.0 }]);
        assert!(bad.validate().is_err());
    }

    #[test]
    fn coercivity() {
        let lin = DriftSpec::new(vec![Drift::LinearPositive { c: 0.5 }]);
        assert!(lin.is_coercive(Side::Positive));
        assert!(!lin.is_coercive(Side::Both));
        assert!(!DriftSpec::zero(2).is_coercive(Side::Both));
        let mixed = DriftSpec::new(vec![Drift::PowerLaw { c: 1.0, gamma: 1.0 }, Drift::Zero]);
        assert!(mixed.is_coercive(Side::Both));
        let neg = DriftSpec::new(vec![
            Drift::PowerLaw { c: 1.0, gamma: 1.0 },
            Drift::PowerLaw { c: -1.0, gamma: 1.0 },
        ]);
        assert!(!neg.is_coercive(Side::Both));
    }
}
