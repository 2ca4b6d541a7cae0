use super::{EvalError, MartingaleFn, Table};
use crate::bits::BitString;
use crate::rational::ExactRational;

/// `child / parent`, or 1 when the parent capital is zero.
///
/// With this convention the two children of any node have ratios summing to
/// 2 whenever the underlying martingale is fair.
pub fn edge_ratio(parent: &ExactRational, child: &ExactRational) -> ExactRational {
    child.checked_div(parent).unwrap_or_else(ExactRational::one)
}

/// Splits `f` into a factor betting only at odd positions and one betting
/// only at even positions, tabulated to `depth`.
///
/// `f_o(x) = f(λ) · Π_{k odd} r_k` and `f_e(x) = Π_{k even} r_k`, where
/// `r_k` is the edge ratio into position `k`. Hence `f_o · f_e = f` at every
/// node up to `depth`; once `f` hits zero the zero factor is already recorded
/// and every later ratio is 1.
pub fn decompose_odd_even(
    f: &MartingaleFn,
    depth: u32,
) -> Result<(MartingaleFn, MartingaleFn), EvalError> {
    let full = Table::tabulate(&**f, depth)?;
    let factor = |odd: bool| {
        Table::from_fn(depth, |x: &BitString| {
            let mut acc = if odd {
                full.get(&BitString::empty()).clone()
            } else {
                ExactRational::one()
            };
            for k in 1..=x.len() {
                if (k % 2 == 1) == odd {
                    let r = edge_ratio(full.get(&x.prefix(k - 1)), full.get(&x.prefix(k)));
                    acc = &acc * &r;
                }
            }
            acc
        })
    };
    Ok((MartingaleFn::new(factor(true)), MartingaleFn::new(factor(false))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::all_up_to;
    use crate::martingale::{random_fair_table, validate_fairness, Martingale};
    use crate::rational::q;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn constant_splits_into_constants() {
        let (fo, fe) = decompose_odd_even(&MartingaleFn::constant(q(1, 1)), 5).unwrap();
        for x in all_up_to(5) {
            assert_eq!(fo.eval(&x).unwrap(), q(1, 1));
            assert_eq!(fe.eval(&x).unwrap(), q(1, 1));
        }
    }

    #[test]
    fn first_position_bet_is_all_odd() {
        let f = MartingaleFn::new(Table::from_fn(1, |x| match x.bit(1) {
            Err(_) => q(1, 1),
            Ok(0) => q(3, 2),
            Ok(_) => q(1, 2),
        }));
        let (fo, fe) = decompose_odd_even(&f, 4).unwrap();
        for x in all_up_to(4) {
            assert_eq!(fe.eval(&x).unwrap(), q(1, 1));
            assert_eq!(fo.eval(&x).unwrap(), f.eval(&x).unwrap());
        }
    }

    #[test]
    fn recomposes_random_tables() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..10 {
            let f = MartingaleFn::new(random_fair_table(&mut rng, 6));
            let (fo, fe) = decompose_odd_even(&f, 6).unwrap();
            assert!(validate_fairness(&fo, 6).passed());
            assert!(validate_fairness(&fe, 6).passed());
            for x in all_up_to(6) {
                assert_eq!(&fo.eval(&x).unwrap() * &fe.eval(&x).unwrap(), f.eval(&x).unwrap());
                if x.len() < 6 {
                    let (b0, b1) = (x.child(0), x.child(1));
                    // odd factor is flat across even edges and vice versa
                    let flat = if x.len() % 2 == 1 { &fo } else { &fe };
                    assert_eq!(flat.eval(&b0).unwrap(), flat.eval(&x).unwrap());
                    assert_eq!(flat.eval(&b1).unwrap(), flat.eval(&x).unwrap());
                }
            }
        }
    }

    #[test]
    fn ratio_convention() {
        assert_eq!(edge_ratio(&q(0, 1), &q(0, 1)), q(1, 1));
        assert_eq!(edge_ratio(&q(2, 1), &q(3, 1)), q(3, 2));
    }
}
