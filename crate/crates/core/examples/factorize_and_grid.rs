//! Gray level factorization, the sampling grid and disc/ring geometry.

use gridsense::imagery::{disc_offsets, factorize_level, factorize_plane, make_grid, GridSpec, Point, SampleGeometry};
use gridsense::synth::{self, Texture};

fn main() -> gridsense::Result<()> {
    for g in [2, 4, 8, 16] {
        let levels: Vec<u8> = [0u8, 63, 64, 127, 128, 255]
            .iter()
            .map(|&l| factorize_level(l, g))
            .collect();
        println!("G = {g:2}: 0, 63, 64, 127, 128, 255 -> {levels:?}");
    }

    let plane = synth::render(
        &Texture::Checker {
            cell: 8.0,
            low: 30.0,
            high: 220.0,
        },
        64,
        48,
        1.0,
        5.0,
        1,
    );
    let factorized = factorize_plane(&plane, 4)?;
    let mut histogram = [0usize; 4];
    factorized.levels().iter().for_each(|&l| histogram[l as usize] += 1);
    println!("4-level histogram of a 64x48 checker: {histogram:?}");

    let grid = make_grid(64, 48, GridSpec::new(8)?, 10);
    println!(
        "step 8, R = 10 on 64x48: {} grid points, first {:?}, last {:?}",
        grid.len(),
        grid[0],
        grid[grid.len() - 1]
    );

    for radius in [4, 8, 16] {
        let geometry = SampleGeometry::new(Point::new(32, 24), radius, 2)?;
        let area = disc_offsets(radius).len();
        println!(
            "R = {radius:2}: {area} disc pixels (pi R^2 = {:.0}), {} rings of width 2",
            std::f64::consts::PI * (radius * radius) as f64,
            geometry.ring_count()
        );
    }
    Ok(())
}
