use proptest::prelude::*;

use gridsense::classifier::{stratified_folds, train_svm, Dataset, Gram, SvmParams};
use gridsense::features::{
    assemble_feature_vector, build_glcm, build_glrcm, ChannelMode, FeatureRecipe, FftSpec, FreqBand, LineSpec,
    PreparedImage, DEFAULT_GLCM_OFFSETS,
};
use gridsense::imagery::{
    disc_offsets, disc_pixels, factorize_level, factorize_plane, frame_change_mask, gray_to_rgb, make_grid,
    niblack_informative_mask, ChangeParams, GrayPlane, GridSpec, NiblackParams, Point, Rect, SampleGeometry,
};
use gridsense::mapping::{
    count_class_points, evaluate_rule, filter_points, interpolate_missing, AlertKind, AlertRule, GridMap, MapEntry,
    TrackPoint,
};

fn plane_strategy(max: u32) -> impl Strategy<Value = GrayPlane> {
    (4..=max, 4..=max).prop_flat_map(|(w, h)| {
        prop::collection::vec(any::<u8>(), (w * h) as usize).prop_map(move |v| GrayPlane::new(w, h, v).unwrap())
    })
}

fn map_strategy() -> impl Strategy<Value = GridMap> {
    prop::collection::vec((prop::collection::vec(0.0f64..1.0, 3), any::<bool>()), 1..60).prop_map(|rows| {
        let entries = rows
            .into_iter()
            .enumerate()
            .map(|(i, (raw, informative))| {
                let s: f64 = raw.iter().sum::<f64>() + 1e-9;
                let p: Vec<f64> = raw.iter().map(|v| v / s).collect();
                let class = (0..3).fold(0, |b, k| if p[k] > p[b] { k } else { b });
                MapEntry {
                    point: Point::new((i % 8) as i32 * 4, (i / 8) as i32 * 4),
                    informative,
                    class: informative.then_some(class),
                    probabilities: if informative { p } else { Vec::new() },
                }
            })
            .collect();
        GridMap {
            image_id: "p".into(),
            grid: GridSpec { step: 4 },
            radius: 0,
            classes: vec!["a".into(), "b".into(), "c".into()],
            entries,
        }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn factorization_is_monotone_and_in_range(a in any::<u8>(), b in any::<u8>(), g in 2usize..=256) {
        let (fa, fb) = (factorize_level(a, g), factorize_level(b, g));
        prop_assert!((fa as usize) < g);
        if a <= b {
            prop_assert!(fa <= fb);
        }
    }

    #[test]
    fn grid_count_has_closed_form(w in 1u32..200, h in 1u32..200, step in 1u32..40, r in 0u32..30) {
        let points = make_grid(w, h, GridSpec::new(step).unwrap(), r);
        let along = |d: u32| if d > 2 * r { ((d - 1 - 2 * r) / step + 1) as usize } else { 0 };
        prop_assert_eq!(points.len(), along(w) * along(h));
        prop_assert!(points.windows(2).all(|p| (p[0].y, p[0].x) < (p[1].y, p[1].x)));
    }

    #[test]
    fn disc_size_tracks_area(r in 1u32..60) {
        let n = disc_offsets(r).len() as f64;
        let area = std::f64::consts::PI * (r * r) as f64;
        prop_assert!((n - area).abs() <= 2.0 * std::f64::consts::PI * r as f64 + 4.0, "{} vs {}", n, area);
    }

    #[test]
    fn niblack_ignores_brightness_shift(plane in plane_strategy(24), shift in 0u8..40) {
        let dimmed = GrayPlane::from_fn(plane.width(), plane.height(), |x, y| plane.get(x, y) / 2).unwrap();
        let shifted = GrayPlane::from_fn(plane.width(), plane.height(), |x, y| dimmed.get(x, y) + shift).unwrap();
        let r = 1;
        let points = make_grid(plane.width(), plane.height(), GridSpec::new(2).unwrap(), r);
        let params = NiblackParams { window: 5, ..NiblackParams::default() };
        prop_assert_eq!(
            niblack_informative_mask(&dimmed, &points, r, &params).unwrap(),
            niblack_informative_mask(&shifted, &points, r, &params).unwrap()
        );
    }

    #[test]
    fn frame_never_differs_from_itself(plane in plane_strategy(40), block in 1u32..20) {
        let params = ChangeParams { block, ..ChangeParams::default() };
        prop_assert_eq!(frame_change_mask(&plane, &plane, &params).unwrap().changed_count(), 0);
    }

    #[test]
    fn symmetric_glcm_is_sum_with_transpose(plane in plane_strategy(16), g in 2usize..20) {
        let f = factorize_plane(&plane, g).unwrap();
        let r = (plane.width().min(plane.height()) - 1) / 2;
        let pixels = disc_pixels(Point::new(r as i32, r as i32), r);
        let plain = build_glcm(&f, &pixels, &DEFAULT_GLCM_OFFSETS, false).unwrap();
        let sym = build_glcm(&f, &pixels, &DEFAULT_GLCM_OFFSETS, true).unwrap();
        prop_assert_eq!(&sym, &sym.transpose());
        let t = plain.transpose();
        let summed: Vec<u64> = plain.counts().iter().zip(t.counts()).map(|(a, b)| a + b).collect();
        prop_assert_eq!(sym.counts(), summed.as_slice());
    }

    #[test]
    fn glrcm_is_rotation_invariant(levels in prop::collection::vec(any::<u8>(), 21 * 21), w in 1u32..4) {
        let plane = GrayPlane::new(21, 21, levels).unwrap();
        let rotated = GrayPlane::from_fn(21, 21, |x, y| plane.get(y, 20 - x)).unwrap();
        let radius = 9 / w * w;
        let geometry = SampleGeometry::new(Point::new(10, 10), radius, w).unwrap();
        let a = build_glrcm(&factorize_plane(&plane, 16).unwrap(), &geometry).unwrap();
        let b = build_glrcm(&factorize_plane(&rotated, 16).unwrap(), &geometry).unwrap();
        prop_assert_eq!(a.total(), disc_offsets(radius).len() as u64);
        prop_assert_eq!(a, b);
    }

    #[test]
    fn vectors_have_recipe_length(
        seed in any::<u64>(),
        luma in any::<bool>(),
        two_radii in any::<bool>(),
        haralick in any::<bool>(),
        fft in any::<bool>(),
        lines in any::<bool>(),
    ) {
        let recipe = FeatureRecipe {
            channels: if luma { ChannelMode::Luma } else { ChannelMode::Rgb },
            radii: if two_radii { vec![4, 8] } else { vec![8] },
            use_haralick: haralick,
            fft: FftSpec { enabled: fft, bands: vec![FreqBand::new(0.0, 0.2), FreqBand::new(0.2, 1.0)] },
            lines: LineSpec { enabled: lines, line_count: 4, wavelet_levels: 3 },
            ..FeatureRecipe::default()
        };
        recipe.validate().unwrap();
        let plane = GrayPlane::from_fn(24, 24, |x, y| ((x as u64 * 31 + y as u64 * 17 + seed) % 256) as u8).unwrap();
        let image = PreparedImage::new(&gray_to_rgb(&plane), &recipe).unwrap();
        let v = assemble_feature_vector(&image, Point::new(12, 12), &recipe).unwrap();
        prop_assert_eq!(v.len(), recipe.vector_len());
        prop_assert!(v.values().iter().all(|x| x.is_finite()));
    }

    #[test]
    fn rbf_gram_is_positive_semidefinite(
        xs in prop::collection::vec(prop::collection::vec(-3.0f64..3.0, 3), 2..12),
        z in prop::collection::vec(-1.0f64..1.0, 12),
        log_gamma in -4.0f64..2.0,
    ) {
        let gram = Gram::rbf(&xs, log_gamma.exp2());
        let n = xs.len();
        let mut q = 0.0;
        for i in 0..n {
            prop_assert!((gram.get(i, i) - 1.0).abs() < 1e-12);
            for j in 0..n {
                prop_assert_eq!(gram.get(i, j), gram.get(j, i));
                q += z[i] * z[j] * gram.get(i, j);
            }
        }
        prop_assert!(q >= -1e-9);
    }

    #[test]
    fn folds_stay_balanced(tags in prop::collection::vec(0usize..3, 10..80), k in 2usize..6, seed in any::<u64>()) {
        let folds = stratified_folds(&tags, k, seed).unwrap();
        let mut sizes = vec![0usize; k];
        folds.iter().for_each(|&f| sizes[f] += 1);
        prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
    }

    #[test]
    fn limiter_is_monotone(map in map_strategy(), a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        for tag in ["a", "b", "c"] {
            let wide = filter_points(&map, tag, lo).unwrap();
            let narrow = filter_points(&map, tag, hi).unwrap();
            prop_assert!(narrow.iter().all(|p| wide.contains(p)));
        }
    }

    #[test]
    fn region_partition_sums(map in map_strategy(), split in 0i32..40, limiter in 0.0f64..1.0) {
        let left = Rect { x: -1000, y: -1000, width: (1000 + split) as u32, height: 3000 };
        let right = Rect { x: split, y: -1000, width: 2000, height: 3000 };
        for tag in ["a", "b", "c"] {
            let all = count_class_points(&map, tag, limiter, None).unwrap();
            let parts = count_class_points(&map, tag, limiter, Some(left)).unwrap()
                + count_class_points(&map, tag, limiter, Some(right)).unwrap();
            prop_assert_eq!(all, parts);
        }
    }

    #[test]
    fn presence_and_absence_are_complementary(
        maps in prop::collection::vec(map_strategy(), 1..6),
        limiter in 0.0f64..1.0,
        min_count in 1usize..6,
    ) {
        let mut rule = AlertRule::new("p", AlertKind::Presence, "b");
        rule.limiter = limiter;
        rule.min_count = min_count;
        let present: Vec<usize> = evaluate_rule(&maps, &rule).unwrap().iter().map(|e| e.frame).collect();
        rule.kind = AlertKind::Absence;
        let absent: Vec<usize> = evaluate_rule(&maps, &rule).unwrap().iter().map(|e| e.frame).collect();
        for f in 0..maps.len() {
            prop_assert!(present.contains(&f) != absent.contains(&f));
        }
    }

    #[test]
    fn interpolation_keeps_present_points(
        track in prop::collection::vec(prop::option::weighted(0.5, (-100.0f64..100.0, -100.0f64..100.0)), 1..30)
    ) {
        prop_assume!(track.iter().any(Option::is_some));
        let points: Vec<TrackPoint> = track.iter().enumerate().map(|(i, &c)| TrackPoint::new(i * 2, c)).collect();
        let done = interpolate_missing(&points).unwrap();
        prop_assert_eq!(done.len(), points.len());
        for (before, after) in points.iter().zip(&done) {
            prop_assert_eq!(before.frame, after.frame);
            prop_assert!(after.center.is_some());
            if before.center.is_some() {
                prop_assert_eq!(before.center, after.center);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn probabilities_form_a_distribution(
        seed in any::<u64>(),
        query in prop::collection::vec(-4.0f64..8.0, 2),
    ) {
        let data: Dataset = gridsense::synth::gaussian_blobs(&[(0.0, 0.0), (4.0, 0.0), (2.0, 4.0)], 12, 0.8, seed);
        let model = train_svm(&data, &SvmParams::new(2.0, 0.5)).unwrap();
        let p = model.predict_proba(&query).unwrap();
        prop_assert!((p.probabilities.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        prop_assert!(p.probabilities.iter().all(|&v| (0.0..=1.0).contains(&v)));
        let max = p.probabilities.iter().cloned().fold(f64::MIN, f64::max);
        prop_assert_eq!(p.probability(), max);
    }
}
