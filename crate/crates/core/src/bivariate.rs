//! Bivariate martingales and the transforms relating them to univariate
//! martingales on the interleaved sequence.
//!
//! A bivariate martingale `g(x, y)` is a martingale in each argument with the
//! other held fixed. [`from_univariate`] reads a univariate `f` on
//! `x₁y₁x₂y₂…` when `|x| = |y|` and averages over completions of the shorter
//! argument otherwise; [`to_univariate`] reads `g` on the odd/even split of
//! its input. Going there and back is the identity.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use crate::bits::{all_up_to, interleave, split, BitString};
use crate::martingale::{savings_transform, EvalError, Martingale, MartingaleFn, Metered};
use crate::rational::ExactRational;

pub trait BivariateMartingale: Send + Sync {
    fn eval(&self, x: &BitString, y: &BitString) -> Result<ExactRational, EvalError>;
    fn describe(&self) -> String;
}

#[derive(Clone)]
pub struct BivariateMartingaleFn(Arc<dyn BivariateMartingale>);

impl BivariateMartingaleFn {
    pub fn new<B: BivariateMartingale + 'static>(b: B) -> Self {
        BivariateMartingaleFn(Arc::new(b))
    }

    /// `g(x, y) = f(x)·h(y)`.
    pub fn product(f: MartingaleFn, h: MartingaleFn) -> Self {
        BivariateMartingaleFn::new(Product { f, h })
    }

    pub fn constant(value: ExactRational) -> Self {
        let c = MartingaleFn::constant(value);
        BivariateMartingaleFn::product(c, MartingaleFn::constant(ExactRational::one()))
    }
}

impl BivariateMartingale for BivariateMartingaleFn {
    fn eval(&self, x: &BitString, y: &BitString) -> Result<ExactRational, EvalError> {
        self.0.eval(x, y)
    }
    fn describe(&self) -> String {
        self.0.describe()
    }
}

impl fmt::Debug for BivariateMartingaleFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0.describe())
    }
}

struct Product {
    f: MartingaleFn,
    h: MartingaleFn,
}

impl BivariateMartingale for Product {
    fn eval(&self, x: &BitString, y: &BitString) -> Result<ExactRational, EvalError> {
        Ok(&self.f.eval(x)? * &self.h.eval(y)?)
    }
    fn describe(&self) -> String {
        format!("product({}, {})", self.f.describe(), self.h.describe())
    }
}

/// Explicit values on the rectangle `|x| <= depth_x`, `|y| <= depth_y`;
/// arguments beyond the rectangle are truncated to it (no further betting).
pub struct BivariateTable {
    depth_x: u32,
    depth_y: u32,
    values: HashMap<(BitString, BitString), ExactRational>,
}

impl BivariateTable {
    pub fn from_fn<F>(depth_x: u32, depth_y: u32, mut f: F) -> Self
    where
        F: FnMut(&BitString, &BitString) -> ExactRational,
    {
        let mut values = HashMap::new();
        for x in all_up_to(depth_x) {
            for y in all_up_to(depth_y) {
                let v = f(&x, &y);
                values.insert((x.clone(), y), v);
            }
        }
        BivariateTable {
            depth_x,
            depth_y,
            values,
        }
    }

    pub fn set(&mut self, x: &BitString, y: &BitString, v: ExactRational) {
        self.values.insert((x.clone(), y.clone()), v);
    }
}

impl BivariateMartingale for BivariateTable {
    fn eval(&self, x: &BitString, y: &BitString) -> Result<ExactRational, EvalError> {
        let key = (
            x.prefix(self.depth_x as usize),
            y.prefix(self.depth_y as usize),
        );
        Ok(self.values[&key].clone())
    }
    fn describe(&self) -> String {
        format!("table({}x{})", self.depth_x, self.depth_y)
    }
}

/// `g` induced by a univariate `f`. Averages are computed by recursing to
/// both children of the shorter argument until the lengths agree, so the
/// cost is exponential in the length difference; results are memoised.
pub struct FromUnivariate {
    f: MartingaleFn,
    memo: Mutex<HashMap<(BitString, BitString), ExactRational>>,
}

impl FromUnivariate {
    fn compute(&self, x: &BitString, y: &BitString) -> Result<ExactRational, EvalError> {
        use std::cmp::Ordering::*;
        match x.len().cmp(&y.len()) {
            Equal => self.f.eval(&interleave(x, y).expect("equal lengths")),
            Less => Ok(ExactRational::average(
                &self.eval(&x.child(0), y)?,
                &self.eval(&x.child(1), y)?,
            )),
            Greater => Ok(ExactRational::average(
                &self.eval(x, &y.child(0))?,
                &self.eval(x, &y.child(1))?,
            )),
        }
    }
}

impl BivariateMartingale for FromUnivariate {
    fn eval(&self, x: &BitString, y: &BitString) -> Result<ExactRational, EvalError> {
        let key = (x.clone(), y.clone());
        if let Some(v) = self.memo.lock().expect("memo lock").get(&key) {
            return Ok(v.clone());
        }
        let v = self.compute(x, y)?;
        self.memo.lock().expect("memo lock").insert(key, v.clone());
        Ok(v)
    }
    fn describe(&self) -> String {
        format!("from_univariate({})", self.f.describe())
    }
}

pub fn from_univariate(f: &MartingaleFn) -> BivariateMartingaleFn {
    BivariateMartingaleFn::new(FromUnivariate {
        f: f.clone(),
        memo: Mutex::new(HashMap::new()),
    })
}

struct ToUnivariate {
    g: BivariateMartingaleFn,
}

impl Martingale for ToUnivariate {
    fn eval_metered(&self, z: &BitString) -> Result<Metered, EvalError> {
        let (x, y) = split(z);
        Ok(Metered::free(self.g.eval(&x, &y)?))
    }
    fn describe(&self) -> String {
        format!("to_univariate({})", self.g.describe())
    }
}

/// `f(z) = g(odd bits of z, even bits of z)`.
pub fn to_univariate(g: &BivariateMartingaleFn) -> MartingaleFn {
    MartingaleFn::new(ToUnivariate { g: g.clone() })
}

/// Savings for bivariate martingales, obtained by round-tripping through the
/// univariate savings transform.
pub fn bivariate_savings(g: &BivariateMartingaleFn) -> Result<BivariateMartingaleFn, EvalError> {
    Ok(from_univariate(&savings_transform(&to_univariate(g))?))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BivariateViolation {
    /// `g(x0, y) + g(x1, y) != 2 g(x, y)`.
    FirstArgument { x: BitString, y: BitString },
    /// `g(x, y0) + g(x, y1) != 2 g(x, y)`.
    SecondArgument { x: BitString, y: BitString },
    Negative { x: BitString, y: BitString },
    Evaluation {
        x: BitString,
        y: BitString,
        error: EvalError,
    },
}

impl fmt::Display for BivariateViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BivariateViolation::FirstArgument { x, y } => write!(
                f,
                "first-argument fairness fails at ({}, {})",
                x.to_token(),
                y.to_token()
            ),
            BivariateViolation::SecondArgument { x, y } => write!(
                f,
                "second-argument fairness fails at ({}, {})",
                x.to_token(),
                y.to_token()
            ),
            BivariateViolation::Negative { x, y } => {
                write!(f, "negative value at ({}, {})", x.to_token(), y.to_token())
            }
            BivariateViolation::Evaluation { x, y, error } => write!(
                f,
                "evaluation failed at ({}, {}): {}",
                x.to_token(),
                y.to_token(),
                error
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BivariateReport {
    pub depth_x: u32,
    pub depth_y: u32,
    pub pairs_checked: usize,
    pub violation: Option<BivariateViolation>,
}

impl BivariateReport {
    pub fn passed(&self) -> bool {
        self.violation.is_none()
    }
}

/// Checks non-negativity on the whole rectangle and both fairness identities
/// wherever the children stay inside it.
pub fn validate_bivariate(g: &dyn BivariateMartingale, depth_x: u32, depth_y: u32) -> BivariateReport {
    let mut pairs_checked = 0;
    let ev = |x: &BitString, y: &BitString| {
        g.eval(x, y).map_err(|error| BivariateViolation::Evaluation {
            x: x.clone(),
            y: y.clone(),
            error,
        })
    };
    let check = |x: &BitString, y: &BitString| -> Result<(), BivariateViolation> {
        let v = ev(x, y)?;
        if v.is_negative() {
            return Err(BivariateViolation::Negative {
                x: x.clone(),
                y: y.clone(),
            });
        }
        if (x.len() as u32) < depth_x && ev(&x.child(0), y)? + ev(&x.child(1), y)? != v.double() {
            return Err(BivariateViolation::FirstArgument {
                x: x.clone(),
                y: y.clone(),
            });
        }
        if (y.len() as u32) < depth_y && ev(x, &y.child(0))? + ev(x, &y.child(1))? != v.double() {
            return Err(BivariateViolation::SecondArgument {
                x: x.clone(),
                y: y.clone(),
            });
        }
        Ok(())
    };
    for x in all_up_to(depth_x) {
        for y in all_up_to(depth_y) {
            if let Err(v) = check(&x, &y) {
                return BivariateReport {
                    depth_x,
                    depth_y,
                    pairs_checked,
                    violation: Some(v),
                };
            }
            pairs_checked += 1;
        }
    }
    BivariateReport {
        depth_x,
        depth_y,
        pairs_checked,
        violation: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::bits;
    use crate::martingale::{doubling_on_zero, random_fair_table, validate_fairness};
    use crate::rational::q;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_f(seed: u64, depth: u32) -> MartingaleFn {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        MartingaleFn::new(random_fair_table(&mut rng, depth))
    }

    #[test]
    fn constant_passes() {
        let g = BivariateMartingaleFn::constant(q(1, 1));
        assert!(validate_bivariate(&g, 4, 4).passed());
    }

    #[test]
    fn from_univariate_examples() {
        let f = random_f(5, 6);
        let g = from_univariate(&f);
        assert_eq!(g.eval(&bits("01"), &bits("10")).unwrap(), f.eval(&bits("0110")).unwrap());
        let expected = ExactRational::average(&f.eval(&bits("0100")).unwrap(), &f.eval(&bits("0110")).unwrap());
        assert_eq!(g.eval(&bits("0"), &bits("10")).unwrap(), expected);
        assert_eq!(g.eval(&bits(""), &bits("")).unwrap(), f.eval(&bits("")).unwrap());
        assert!(validate_bivariate(&g, 4, 4).passed());
    }

    #[test]
    fn to_univariate_examples() {
        let g = from_univariate(&random_f(6, 6));
        let f = to_univariate(&g);
        assert_eq!(f.eval(&bits("0110")).unwrap(), g.eval(&bits("01"), &bits("10")).unwrap());
        assert_eq!(f.eval(&bits("011")).unwrap(), g.eval(&bits("01"), &bits("1")).unwrap());
        assert_eq!(f.eval(&bits("")).unwrap(), g.eval(&bits(""), &bits("")).unwrap());
    }

    #[test]
    fn product_passes() {
        let g = BivariateMartingaleFn::product(random_f(7, 4), doubling_on_zero());
        assert!(validate_bivariate(&g, 4, 4).passed());
    }

    #[test]
    fn detects_broken_second_argument() {
        let mut t = BivariateTable::from_fn(2, 2, |_, _| q(1, 1));
        t.set(&bits("1"), &bits("0"), q(3, 2));
        let report = validate_bivariate(&t, 2, 2);
        assert!(matches!(
            report.violation,
            Some(BivariateViolation::FirstArgument { .. }) | Some(BivariateViolation::SecondArgument { .. })
        ));
    }

    #[test]
    fn round_trip_identity() {
        let f = random_f(8, 8);
        let back = to_univariate(&from_univariate(&f));
        for z in all_up_to(8) {
            assert_eq!(back.eval(&z).unwrap(), f.eval(&z).unwrap());
        }
    }

    #[test]
    fn savings_of_constant() {
        let g = bivariate_savings(&BivariateMartingaleFn::constant(q(1, 1))).unwrap();
        for x in all_up_to(3) {
            for y in all_up_to(3) {
                assert_eq!(g.eval(&x, &y).unwrap(), q(2, 1));
            }
        }
        assert!(bivariate_savings(&BivariateMartingaleFn::constant(q(0, 1))).is_err());
    }

    #[test]
    fn savings_of_doubler_halving_on_equal_lengths() {
        let g = bivariate_savings(&from_univariate(&doubling_on_zero())).unwrap();
        assert!(validate_bivariate(&g, 5, 5).passed());
        for n in 0..=4u32 {
            for x in crate::bits::all_of_length(n) {
                for y in crate::bits::all_of_length(n) {
                    let v = g.eval(&x, &y).unwrap();
                    for m in 0..=(4 - n) {
                        for xv in crate::bits::all_of_length(m).map(|v| x.concat(&v)) {
                            for yw in crate::bits::all_of_length(m).map(|w| y.concat(&w)) {
                                assert!(g.eval(&xv, &yw).unwrap() >= v.halve());
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn savings_halving_fails_off_the_diagonal() {
        // the averaged value at an unequal pair can exceed twice a later equal pair
        let g = bivariate_savings(&from_univariate(&doubling_on_zero())).unwrap();
        assert_eq!(g.eval(&bits(""), &bits("0")).unwrap(), q(5, 2));
        assert_eq!(g.eval(&bits("1"), &bits("0")).unwrap(), q(1, 1));
    }

    #[test]
    fn savings_univariate_fair() {
        let f = to_univariate(&bivariate_savings(&from_univariate(&random_f(9, 6))).unwrap());
        assert!(validate_fairness(&f, 6).passed());
    }

    #[test]
    fn unboundedness_transfer_finite_form() {
        let f = random_f(10, 8);
        let g = from_univariate(&f);
        for z in crate::bits::all_of_length(8) {
            let via_pairs = (0..=4)
                .map(|n| {
                    let (x, y) = split(&z.prefix(2 * n));
                    g.eval(&x, &y).unwrap()
                })
                .max()
                .unwrap();
            let via_prefixes = (0..=4).map(|n| f.eval(&z.prefix(2 * n)).unwrap()).max().unwrap();
            assert_eq!(via_pairs, via_prefixes);
        }
    }
}
