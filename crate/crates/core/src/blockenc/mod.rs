//! Block encodings, threshold polynomials and singular-value discrimination.

pub mod discriminate;
pub mod encoding;
pub mod poly;

pub use discriminate::{right_singular_system, sv_projector, svd_discriminate, Discrimination, Discriminator, SvdBackend};
pub use encoding::{
    block_encode_density, dilation, dilation_encoding, extract_block, perturbed_density_encoding, purify,
    verify_block_encoding, BlockEncoding, BlockUnitary,
};
pub use poly::{degree_bound, threshold_poly, ThresholdPoly, C_DEG};
