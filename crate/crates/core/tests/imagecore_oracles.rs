use drawscaffold_core::imagecore::{
    apply_blur, hsv_to_srgb, lab_to_srgb, lightness_to_gray, recolor_region, srgb_to_hsv, srgb_to_lab,
    to_value_image, BlurFilter, BlurSpec, ImageBuffer, Mask,
};
use palette::{white_point::D65, FromColor, Hsv, IntoColor, Lab, Srgb};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn oracle_lab(rgb: [u8; 3]) -> Lab<D65, f64> {
    let s: Srgb<f64> = Srgb::new(rgb[0], rgb[1], rgb[2]).into_format();
    s.into_linear().into_color()
}

fn oracle_hsv(rgb: [u8; 3]) -> Hsv<palette::encoding::Srgb, f64> {
    let s: Srgb<f64> = Srgb::new(rgb[0], rgb[1], rgb[2]).into_format();
    Hsv::from_color(s)
}

fn max_channel_error(a: [u8; 3], b: [u8; 3]) -> u8 {
    (0..3).map(|i| a[i].abs_diff(b[i])).max().unwrap()
}

#[test]
fn lab_agrees_with_reference_library() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20_000 {
        let rgb: [u8; 3] = rng.gen();
        let ours = srgb_to_lab(rgb);
        let theirs = oracle_lab(rgb);
        assert!((ours.l - theirs.l).abs() < 1e-3, "{rgb:?}: L {} vs {}", ours.l, theirs.l);
        assert!((ours.a - theirs.a).abs() < 1e-3, "{rgb:?}: a {} vs {}", ours.a, theirs.a);
        assert!((ours.b - theirs.b).abs() < 1e-3, "{rgb:?}: b {} vs {}", ours.b, theirs.b);
    }
}

#[test]
fn pure_red_lab() {
    let theirs = oracle_lab([255, 0, 0]);
    // tabulated D65 values
    assert!((theirs.l - 53.24).abs() < 0.01);
    assert!((theirs.a - 80.09).abs() < 0.01);
    assert!((theirs.b - 67.20).abs() < 0.01);
    let ours = srgb_to_lab([255, 0, 0]);
    assert!((ours.l - theirs.l).abs() < 1e-3);
    assert!((ours.a - theirs.a).abs() < 1e-3);
    assert!((ours.b - theirs.b).abs() < 1e-3);
}

#[test]
fn hsv_agrees_with_reference_library() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..20_000 {
        let rgb: [u8; 3] = rng.gen();
        let ours = srgb_to_hsv(rgb);
        let theirs = oracle_hsv(rgb);
        assert!((ours.s - theirs.saturation).abs() < 1e-9);
        assert!((ours.v - theirs.value).abs() < 1e-9);
        if theirs.saturation > 0.0 {
            let hd = (ours.h - theirs.hue.into_positive_degrees()).abs();
            assert!(hd.min(360.0 - hd) < 1e-6, "{rgb:?}");
        }
    }
}

#[test]
fn round_trip_over_many_colors() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut worst_lab = 0;
    let mut worst_hsv = 0;
    for _ in 0..100_000 {
        let rgb: [u8; 3] = rng.gen();
        worst_lab = worst_lab.max(max_channel_error(lab_to_srgb(srgb_to_lab(rgb)), rgb));
        worst_hsv = worst_hsv.max(max_channel_error(hsv_to_srgb(srgb_to_hsv(rgb)), rgb));
    }
    assert!(worst_lab <= 1, "lab round trip error {worst_lab}");
    assert!(worst_hsv <= 1, "hsv round trip error {worst_hsv}");
}

#[test]
fn two_tone_value_image() {
    let red = [255, 0, 0];
    let blue = [0, 0, 255];
    let img = ImageBuffer::from_fn(8, 4, |x, _| if x < 4 { red } else { blue }).unwrap();
    let gray = to_value_image(&img);
    let expect = |c: [u8; 3]| (255.0 * oracle_lab(c).l / 100.0).round() as u8;
    assert_eq!(gray.get(0, 0), [expect(red); 3]);
    assert_eq!(gray.get(7, 3), [expect(blue); 3]);
    assert_eq!(lightness_to_gray(oracle_lab(red).l), expect(red));
}

/// Direct 2D convolution with clamp-to-edge, no separability.
fn naive_gaussian(img: &ImageBuffer, sigma: f64) -> Vec<f64> {
    let r = (3.0 * sigma).ceil() as i64;
    let mut weights = Vec::new();
    for dy in -r..=r {
        for dx in -r..=r {
            weights.push((dx, dy, (-((dx * dx + dy * dy) as f64) / (2.0 * sigma * sigma)).exp()));
        }
    }
    let total: f64 = weights.iter().map(|w| w.2).sum();
    let (w, h) = img.dimensions();
    let mut out = Vec::new();
    for y in 0..h as i64 {
        for x in 0..w as i64 {
            let acc: f64 = weights
                .iter()
                .map(|&(dx, dy, wt)| wt * img.get_clamped(x + dx, y + dy)[0] as f64)
                .sum();
            out.push(acc / total);
        }
    }
    out
}

#[test]
fn gaussian_matches_direct_convolution() {
    let img = ImageBuffer::from_fn(25, 25, |x, y| if (x, y) == (12, 12) { [255; 3] } else { [0; 3] }).unwrap();
    for sigma in [1.5, 2.2, 4.9] {
        let out = apply_blur(&img, &BlurSpec::new(BlurFilter::Gaussian, sigma).unwrap()).unwrap();
        let oracle = naive_gaussian(&img, sigma);
        for (i, p) in out.pixels().iter().enumerate() {
            assert!((p[0] as f64 - oracle[i]).abs() <= 0.5 + 1e-9, "sigma {sigma} pixel {i}");
        }
        let peak = oracle[12 * 25 + 12].round() as u8;
        assert_eq!(out.get(12, 12)[0], peak);
    }
}

#[test]
fn recolor_gray_gradient_to_red() {
    let img = ImageBuffer::from_fn(256, 2, |x, _| [x as u8; 3]).unwrap();
    let full = Mask::from_fn(256, 2, |_, _| true);
    let out = recolor_region(&img, &full, 0.0, 1.0).unwrap();
    for x in 0..256u32 {
        let v = x as f64 / 255.0;
        let theirs: Srgb<f64> = Srgb::from_color(Hsv::new(0.0, 1.0, v));
        let expect: Srgb<u8> = theirs.into_format();
        let got = out.get(x, 1);
        assert_eq!(max_channel_error(got, [expect.red, expect.green, expect.blue]), 0, "x={x}");
        assert!((srgb_to_hsv(got).v - v).abs() <= 1.0 / 255.0 + 1e-12);
    }
}

#[test]
fn recolor_with_own_hue_is_identity() {
    let c = [40, 160, 90];
    let hsv = srgb_to_hsv(c);
    let img = ImageBuffer::filled(6, 6, c).unwrap();
    let out = recolor_region(&img, &Mask::from_fn(6, 6, |_, _| true), hsv.h, hsv.s).unwrap();
    for p in out.pixels() {
        assert!(max_channel_error(*p, c) <= 1);
    }
}

#[test]
fn filters_preserve_constants() {
    let img = ImageBuffer::filled(17, 9, [93, 12, 201]).unwrap();
    for filter in [BlurFilter::Gaussian, BlurFilter::Bilateral, BlurFilter::Median] {
        for k in [1.5, 3.0, 4.9] {
            let out = apply_blur(&img, &BlurSpec::new(filter, k).unwrap()).unwrap();
            assert_eq!(out, img, "{filter:?} {k}");
            assert_eq!(apply_blur(&out, &BlurSpec::new(filter, k).unwrap()).unwrap(), img);
        }
    }
}
