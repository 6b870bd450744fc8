//! Circuit passes: hidden-inverse orientation, randomized compiling, SK1.

mod rc;
mod sites;
mod sk1;

pub use rc::randomized_compile;
pub use sites::{
    apply_orientation_rule, find_hidden_inverse_sites, ConjugationSite, OrientationRule, SiteDecision,
};
pub use sk1::{sk1_compile, sk1_expand, sk1_phase};
