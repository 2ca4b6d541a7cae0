//! Exact-arithmetic laboratory for martingales on binary strings, pair
//! betting, and a stage-based diagonalization against oracle martingales.
//!
//! ```
//! use pairlab::bits::bits;
//! use pairlab::coding::first_two;
//! use pairlab::martingale::doubling_on_zero;
//!
//! let pair = first_two(&doubling_on_zero(), &bits(""), 0).unwrap();
//! assert_eq!((pair.first.to_token(), pair.second.to_token()), ("01".into(), "10".into()));
//! ```

pub mod bits;
pub mod bivariate;
pub mod cli;
pub mod coding;
pub mod construction;
pub mod decoder;
pub mod martingale;
pub mod mdsl;
pub mod rational;
pub mod source;
pub mod suite;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    struct Introduction;
    #[doc = include_str!("../../../book/src/bits-and-rationals.md")]
    struct BitsAndRationals;
    #[doc = include_str!("../../../book/src/martingales.md")]
    struct Martingales;
    #[doc = include_str!("../../../book/src/pair-betting.md")]
    struct PairBetting;
    #[doc = include_str!("../../../book/src/language.md")]
    struct Language;
    #[doc = include_str!("../../../book/src/safe-extensions.md")]
    struct SafeExtensions;
    #[doc = include_str!("../../../book/src/construction.md")]
    struct Construction;
    #[doc = include_str!("../../../book/src/decoder.md")]
    struct Decoder;
    #[doc = include_str!("../../../book/src/cli.md")]
    struct Cli;
}
