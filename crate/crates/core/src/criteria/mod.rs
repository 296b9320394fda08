//! Membership and regularity tests: tail reports, Zygmund-type constants, Carleson sums and the
//! area integrals of `|S'|` over Carleson boxes.

mod carleson;
mod tail;
mod zygmund;

pub use carleson::{
    atom_singular_derivative_norm, carleson_sum, carleson_sum_exact, qbox_check, support_hull, top_half_integral, w1_report,
    BoxIntegral, CarlesonBox, QboxReport, QuadOptions, W1Report,
};
pub use tail::{tail_ratio, TailEntry, TailReport, Verdict, CONVERGING_RATIO, DIVERGING_RATIO};
pub use zygmund::{cyclicity_constant, exp_zygmund_constant, zygmund_seminorm, PairConstantReport, ZygmundReport};
