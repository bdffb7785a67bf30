//! Niblack informative-point mask on a still image and the block change mask
//! between two frames.

use gridsense::imagery::{
    frame_change_mask, make_grid, niblack_informative_mask, ChangeParams, GridSpec, InformativeMask, NiblackParams,
    Rect,
};
use gridsense::synth::{self, Texture};

fn main() -> gridsense::Result<()> {
    let flat = Texture::Flat { level: 120.0 };
    let base = synth::render(&flat, 160, 96, 1.0, 0.0, 1);
    let scene = synth::paste(
        &base,
        Rect {
            x: 80,
            y: 0,
            width: 80,
            height: 96,
        },
        &synth::three_textures()[1],
        4.0,
        2,
    );
    let points = make_grid(160, 96, GridSpec::new(8)?, 8);
    let mask = niblack_informative_mask(&scene, &points, 8, &NiblackParams::default())?;
    println!(
        "{} of {} grid points are informative",
        mask.informative_count(),
        points.len()
    );
    print_mask(&points, &mask, 160);

    let background = synth::render(
        &Texture::ValueNoise {
            grain: 4.0,
            low: 40.0,
            high: 210.0,
        },
        160,
        96,
        1.0,
        0.0,
        4,
    );
    let reference = synth::jitter(&background, 3.0, 10);
    let with_target = synth::paste(
        &background,
        Rect {
            x: 32,
            y: 32,
            width: 40,
            height: 40,
        },
        &synth::three_textures()[2],
        0.0,
        11,
    );
    let frame = synth::jitter(&with_target, 3.0, 12);
    let changes = frame_change_mask(&frame, &reference, &ChangeParams::default())?;
    println!(
        "{} of {} blocks changed",
        changes.changed_count(),
        changes.changed.len()
    );
    for row in 0..changes.rows {
        let line: String = (0..changes.cols)
            .map(|c| if changes.is_changed(c, row) { '#' } else { '.' })
            .collect();
        println!("  {line}");
    }
    let from_changes = InformativeMask::from_changes(&points, &changes);
    println!(
        "{} grid points fall in changed blocks",
        from_changes.informative_count()
    );
    Ok(())
}

fn print_mask(points: &[gridsense::imagery::Point], mask: &InformativeMask, width: i32) {
    let mut line = String::new();
    for (i, p) in points.iter().enumerate() {
        line.push(if mask.get(i) { '#' } else { '.' });
        if points.get(i + 1).is_none_or(|q| q.y != p.y) || p.x >= width {
            println!("  {line}");
            line.clear();
        }
    }
}
