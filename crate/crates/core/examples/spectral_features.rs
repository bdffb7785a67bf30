//! FFT band powers and Haar line spectra, alone and as part of a recipe.

use gridsense::features::{
    assemble_feature_vector, fft_power_bands, inscribed_patch_side, line_spectrum, ChannelMode, FeatureRecipe,
    FreqBand, PreparedImage,
};
use gridsense::imagery::Point;
use gridsense::synth::{self, Texture};

fn main() -> gridsense::Result<()> {
    let center = Point::new(48, 48);
    let radius = 20;
    let side = inscribed_patch_side(radius);
    let bands = [
        FreqBand::new(0.0, 0.0625),
        FreqBand::new(0.0625, 0.125),
        FreqBand::new(0.125, 0.25),
        FreqBand::new(0.25, 0.51),
    ];
    println!("R = {radius}: {side}x{side} FFT patch");
    for period in [4.0, 8.0, 16.0] {
        let texture = Texture::Stripes {
            period,
            angle: 0.0,
            low: 40.0,
            high: 210.0,
        };
        let plane = synth::render(&texture, 96, 96, 1.0, 0.0, 1);
        let power = fft_power_bands(&plane, center, side, &bands)?;
        let lines = line_spectrum(&plane, center, radius, 4, 3)?;
        let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:.3}")).collect::<Vec<_>>().join(" ");
        println!(
            "stripes period {period:4}: bands [{}]  lines [{}]",
            fmt(&power),
            fmt(&lines)
        );
    }

    let mut recipe = FeatureRecipe {
        channels: ChannelMode::Luma,
        radii: vec![radius],
        ..FeatureRecipe::default()
    };
    let base = recipe.vector_len();
    recipe.fft.enabled = true;
    recipe.lines.enabled = true;
    recipe.validate()?;
    let image = synth::render_rgb(&synth::three_textures()[0], 96, 96, 1.0, 5.0, 2);
    let v = assemble_feature_vector(&PreparedImage::new(&image, &recipe)?, center, &recipe)?;
    println!("vector length {base} without spectra, {} with", v.len());
    Ok(())
}
