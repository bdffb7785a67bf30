//! Rasters, sampling geometry and the masks that decide which grid points
//! get classified.

mod geometry;
mod mask;
mod plane;

pub use geometry::{
    check_disc_inside, disc_inside, disc_offsets, disc_pixels, make_grid, GridSpec, PixelSet, Point, Rect,
    SampleGeometry,
};
pub use mask::{
    frame_change_mask, niblack_informative_mask, BlockChanges, ChangeParams, InformativeMask, NiblackParams,
};
pub use plane::{
    factorize_level, factorize_plane, gray_to_rgb, load_rgb, luma_plane, split_channels, FactorizedPlane, GrayPlane,
    DEFAULT_LEVELS,
};
