mod common;

use common::{rng, uniform_field, uniform_rgb};
use osmosis_fusion::baselines::{poisson_edit, Mask, POISSON_DEFAULT};
use osmosis_fusion::grid::laplacian;
use osmosis_fusion::{Image, ScalarField};
use proptest::prelude::*;

fn rect_mask(h: usize, w: usize, rows: std::ops::Range<usize>, cols: std::ops::Range<usize>) -> Mask {
    Mask::new(ScalarField::from_fn(
        h,
        w,
        |i, j| {
            if rows.contains(&i) && cols.contains(&j) {
                1.0
            } else {
                0.0
            }
        },
    ))
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn additive_shift_is_absorbed(seed in 0u64..10_000, shift in -50.0f64..50.0) {
        let mut r = rng(seed);
        let b = uniform_rgb(&mut r, 16, 16, 60.0, 200.0);
        let f = b.map(|x| x + shift);
        let mask = rect_mask(16, 16, 4..12, 3..10);
        let out = poisson_edit(&f, &b, &mask, &POISSON_DEFAULT).unwrap();
        for res in &out.residuals {
            prop_assert!(*res < 1e-6);
        }
        let diff = out.image.zip_map(&b, |a, c| (a - c).abs()).max();
        prop_assert!(diff < 1e-6, "max deviation {}", diff);
    }
}

#[test]
fn shift_only_needed_on_mask_closure() {
    let mut r = rng(41);
    let b = Image::gray(uniform_field(&mut r, 14, 14, 60.0, 200.0));
    let mask = rect_mask(14, 14, 5..9, 5..9);
    // f agrees with b + 7 on rows/cols 4..10, garbage elsewhere
    let noise = uniform_field(&mut r, 14, 14, 0.0, 255.0);
    let f = Image::gray(ScalarField::from_fn(14, 14, |i, j| {
        if (4..10).contains(&i) && (4..10).contains(&j) {
            b.channel(0)[(i, j)] + 7.0
        } else {
            noise[(i, j)]
        }
    }));
    let out = poisson_edit(&f, &b, &mask, &POISSON_DEFAULT).unwrap();
    assert!(out.residuals[0] < 1e-6);
    assert!(out.image.zip_map(&b, |a, c| (a - c).abs()).max() < 1e-6);
}

#[test]
fn solution_satisfies_poisson_equation_on_mask() {
    let mut r = rng(42);
    let f = Image::gray(uniform_field(&mut r, 12, 12, 0.0, 255.0));
    let b = Image::gray(uniform_field(&mut r, 12, 12, 0.0, 255.0));
    let mask = rect_mask(12, 12, 2..9, 3..11);
    let out = poisson_edit(&f, &b, &mask, &POISSON_DEFAULT).unwrap();
    let (lu, lf) = (laplacian(out.image.channel(0)), laplacian(f.channel(0)));
    for i in 0..12 {
        for j in 0..12 {
            if mask.contains(i, j) {
                assert!((lu[(i, j)] - lf[(i, j)]).abs() < 1e-8);
            } else {
                assert_eq!(out.image.channel(0)[(i, j)], b.channel(0)[(i, j)]);
            }
        }
    }
}

#[test]
fn mask_validation() {
    assert!(Mask::new(ScalarField::filled(3, 3, 0.2)).is_err());
    let m = Mask::threshold(&ScalarField::from_fn(3, 3, |i, _| i as f64 * 0.4), 0.5);
    assert_eq!(m.count(), 3);
    let f = Image::filled(1, 3, 3, 1.0).unwrap();
    let wrong = Mask::new(ScalarField::zeros(3, 4)).unwrap();
    assert!(poisson_edit(&f, &f, &wrong, &POISSON_DEFAULT).is_err());
}
