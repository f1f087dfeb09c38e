use crate::formats::{EllLayout, HybLayout};

use super::{WarpLayoutK1, WarpLayoutK2};

/// Layouts that store rows padded to a common length.
pub trait Padded {
    fn stored_slots(&self) -> usize;
    fn padded_slots(&self) -> usize;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PaddingReport {
    pub stored_slots: usize,
    pub padded_slots: usize,
    /// `padded / stored`, or 0 for an empty layout.
    pub padding_fraction: f64,
}

pub fn padding_report<L: Padded + ?Sized>(layout: &L) -> PaddingReport {
    let stored = layout.stored_slots();
    let padded = layout.padded_slots();
    PaddingReport {
        stored_slots: stored,
        padded_slots: padded,
        padding_fraction: if stored == 0 {
            0.0
        } else {
            padded as f64 / stored as f64
        },
    }
}

/// Share of the unsorted layout's padding removed by sorting, in percent.
pub fn padding_difference_percentage(unsorted_padding: usize, sorted_padding: usize) -> f64 {
    if unsorted_padding == 0 {
        return 0.0;
    }
    (unsorted_padding as f64 - sorted_padding as f64) / unsorted_padding as f64 * 100.0
}

macro_rules! padded_via_inherent {
    ($($t:ty),*) => {$(
        impl Padded for $t {
            fn stored_slots(&self) -> usize {
                <$t>::stored_slots(self)
            }
            fn padded_slots(&self) -> usize {
                <$t>::padded_slots(self)
            }
        }
    )*};
}

padded_via_inherent!(EllLayout, HybLayout, WarpLayoutK1, WarpLayoutK2);

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ellwarp::{build_k1, build_k1_unsorted};
    use crate::formats::build_ell;
    use crate::matrix::{generate_synthetic, SyntheticKind};
    use crate::simt::WarpModelConfig;

    #[test]
    fn uniform_rows() {
        let m = generate_synthetic(&SyntheticKind::UniformBand { n: 64, half_width: 2 }, 0).unwrap();
        let r = padding_report(&build_ell(&m));
        assert_eq!((r.stored_slots, r.padded_slots, r.padding_fraction), (320, 0, 0.0));
    }

    #[test]
    fn sorting_reduces_padding_on_skewed_rows() {
        let m = generate_synthetic(
            &SyntheticKind::PowerlawRows {
                nrows: 2000,
                alpha: 2.0,
                maxrow: 300,
            },
            11,
        )
        .unwrap();
        let cfg = WarpModelConfig::default();
        let sorted = padding_report(&build_k1(&m, &cfg).unwrap());
        let unsorted = padding_report(&build_k1_unsorted(&m, &cfg).unwrap());
        let ell = padding_report(&build_ell(&m));
        assert!(sorted.padded_slots < unsorted.padded_slots);
        assert!(unsorted.padded_slots <= ell.padded_slots);
        assert!(padding_difference_percentage(unsorted.padded_slots, sorted.padded_slots) > 0.0);
    }

    #[test]
    fn heart_like_k1_below_ell() {
        let m = generate_synthetic(
            &SyntheticKind::FemTetGraph {
                n: 3129,
                minrow: 5,
                maxrow: 21,
            },
            1,
        )
        .unwrap();
        let k1 = build_k1(&m, &WarpModelConfig::default()).unwrap();
        assert!(k1.padded_slots() < build_ell(&m).padded_slots());
    }

    #[test]
    fn difference_percentage() {
        assert_eq!(padding_difference_percentage(200, 50), 75.0);
        assert_eq!(padding_difference_percentage(0, 0), 0.0);
    }
}
