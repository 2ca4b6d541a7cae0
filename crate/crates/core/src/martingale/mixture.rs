use super::{EvalError, Martingale, MartingaleFn, Metered};
use crate::bits::BitString;
use crate::rational::ExactRational;

/// `base + Σ cᵢ·dᵢ` with non-negative coefficients.
///
/// Metering: the constant base costs one step, each component adds its own
/// steps, and the oracle use is the largest component use. A mixture with no
/// components therefore costs exactly one step.
#[derive(Clone)]
pub struct Mixture {
    base: ExactRational,
    components: Vec<(ExactRational, MartingaleFn)>,
}

impl Mixture {
    pub fn constant(base: ExactRational) -> Self {
        Mixture {
            base,
            components: Vec::new(),
        }
    }

    /// The constant-1 martingale that every construction starts from.
    pub fn unit() -> Self {
        Mixture::constant(ExactRational::one())
    }

    pub fn base(&self) -> &ExactRational {
        &self.base
    }

    pub fn components(&self) -> &[(ExactRational, MartingaleFn)] {
        &self.components
    }

    /// `self + coefficient·d`, as a new mixture.
    pub fn with(&self, coefficient: ExactRational, d: MartingaleFn) -> Self {
        assert!(!coefficient.is_negative(), "negative mixing coefficient");
        let mut out = self.clone();
        out.components.push((coefficient, d));
        out
    }

    /// Multi-line description: the base, then one line per component.
    pub fn describe_lines(&self) -> Vec<String> {
        let mut lines = vec![format!("base {}", self.base)];
        lines.extend(
            self.components
                .iter()
                .map(|(c, d)| format!("+ {} * {}", c, d.describe())),
        );
        lines
    }
}

impl Martingale for Mixture {
    fn eval_metered(&self, x: &BitString) -> Result<Metered, EvalError> {
        let mut out = Metered {
            value: self.base.clone(),
            steps: 1,
            oracle_use: 0,
        };
        for (c, d) in &self.components {
            let m = d.eval_metered(x)?;
            out.value = out.value + c * &m.value;
            out.steps += m.steps;
            out.oracle_use = out.oracle_use.max(m.oracle_use);
        }
        Ok(out)
    }

    fn describe(&self) -> String {
        let parts: Vec<String> = std::iter::once(self.base.to_string())
            .chain(
                self.components
                    .iter()
                    .map(|(c, d)| format!("{} * {}", c, d.describe())),
            )
            .collect();
        format!("mixture({})", parts.join(" + "))
    }
}

/// Pointwise `d + coefficient·d_s`.
pub fn mix(d: &MartingaleFn, d_s: &MartingaleFn, coefficient: ExactRational) -> MartingaleFn {
    MartingaleFn::new(
        Mixture::constant(ExactRational::zero())
            .with(ExactRational::one(), d.clone())
            .with(coefficient, d_s.clone()),
    )
}
