//! GLCM, OGCM and GLRCM of a circular sample, their Haralick statistics and
//! the assembled feature vector of a recipe.

use gridsense::features::{
    assemble_feature_vector, build_glcm, build_glrcm, build_ogcm, haralick_stats, FeatureRecipe, OgcmPairs,
    PreparedImage, DEFAULT_GLCM_OFFSETS,
};
use gridsense::imagery::{disc_pixels, factorize_plane, Point, SampleGeometry};
use gridsense::synth;

fn main() -> gridsense::Result<()> {
    let center = Point::new(40, 40);
    let radius = 16;
    for (name, texture) in ["noise", "stripes", "spots"].iter().zip(synth::three_textures()) {
        let plane = synth::render(&texture, 80, 80, 1.0, 8.0, 3);
        let factorized = factorize_plane(&plane, 8)?;
        let disc = disc_pixels(center, radius);

        let glcm = build_glcm(&factorized, &disc, &DEFAULT_GLCM_OFFSETS, true)?;
        let ogcm = build_ogcm(&plane, &disc, OgcmPairs::AxialAndDiagonal, 8)?;
        let glrcm = build_glrcm(&factorized, &SampleGeometry::new(center, radius, 2)?)?;
        println!("{name}:");
        for (label, m) in [("glcm", &glcm), ("ogcm", &ogcm), ("glrcm", &glrcm)] {
            let s = haralick_stats(m)?;
            println!(
                "  {label:5} {:2}x{:<2} total {:5}  contrast {:7.3} homogeneity {:.3} entropy {:.3} uniformity {:.3}",
                m.rows(),
                m.cols(),
                m.total(),
                s.contrast,
                s.homogeneity,
                s.entropy,
                s.uniformity
            );
        }
    }

    let recipe = FeatureRecipe::default();
    let image = synth::render_rgb(&synth::three_textures()[1], 80, 80, 1.0, 8.0, 3);
    let vector = assemble_feature_vector(&PreparedImage::new(&image, &recipe)?, center, &recipe)?;
    println!("default recipe: {} features per sample", vector.len());
    println!("{}", recipe.to_json()?);
    Ok(())
}
