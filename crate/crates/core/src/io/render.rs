//! Binary PPM (`P6`) rasters of snapshots.

use std::fmt::Write as _;

use crate::spectral::RealField;

/// Approximate viridis stops, low to high.
const STOPS: [[f64; 3]; 5] = [
    [68.0, 1.0, 84.0],
    [59.0, 82.0, 139.0],
    [33.0, 145.0, 140.0],
    [94.0, 201.0, 98.0],
    [253.0, 231.0, 37.0],
];

const MIN_SIDE: usize = 256;

fn colormap(u: f64) -> [u8; 3] {
    let u = u.clamp(0.0, 1.0) * (STOPS.len() - 1) as f64;
    let i = (u.floor() as usize).min(STOPS.len() - 2);
    let f = u - i as f64;
    let mut px = [0u8; 3];
    for (c, p) in px.iter_mut().enumerate() {
        *p = (STOPS[i][c] + f * (STOPS[i + 1][c] - STOPS[i][c])).round() as u8;
    }
    px
}

#[derive(Debug, Clone, PartialEq)]
pub struct Raster {
    pub width: usize,
    pub height: usize,
    /// RGB triples, row-major from the top-left corner.
    pub pixels: Vec<u8>,
    pub min: f64,
    pub max: f64,
}

impl Raster {
    pub fn to_ppm(&self) -> Vec<u8> {
        let mut out = format!("P6\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.pixels);
        out
    }

    /// Sidecar text with the value range the colors or axis span.
    pub fn annotation(&self, t: f64) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "min = {:?}", self.min);
        let _ = writeln!(s, "max = {:?}", self.max);
        let _ = writeln!(s, "t = {t:?}");
        let _ = writeln!(s, "width = {}", self.width);
        let _ = writeln!(s, "height = {}", self.height);
        s
    }
}

fn normalize(v: f64, min: f64, max: f64) -> f64 {
    if max > min {
        (v - min) / (max - min)
    } else {
        0.5
    }
}

/// Heatmap for 2D fields (x to the right, y up), polyline plot for 1D fields.
pub fn render(field: &RealField) -> Raster {
    let grid = field.grid();
    let n = grid.n();
    let (min, max) = (field.min(), field.max());
    let v = field.values();
    if grid.dim() == 2 {
        let scale = MIN_SIDE.div_ceil(n).max(1);
        let side = n * scale;
        let mut pixels = Vec::with_capacity(side * side * 3);
        for py in 0..side {
            let j = n - 1 - py / scale;
            for px in 0..side {
                let i = px / scale;
                pixels.extend_from_slice(&colormap(normalize(v[i * n + j], min, max)));
            }
        }
        return Raster {
            width: side,
            height: side,
            pixels,
            min,
            max,
        };
    }

    let width = (2 * MIN_SIDE).max(n);
    let height = MIN_SIDE;
    let mut pixels = vec![255u8; width * height * 3];
    let row_of = |value: f64| ((height - 1) as f64 * (1.0 - normalize(value, min, max))).round() as usize;
    let mut prev: Option<usize> = None;
    for x in 0..width {
        let y = row_of(v[x * n / width]);
        let (lo, hi) = match prev {
            Some(p) => (p.min(y), p.max(y)),
            None => (y, y),
        };
        for row in lo..=hi {
            let o = (row * width + x) * 3;
            pixels[o..o + 3].copy_from_slice(&[20, 20, 20]);
        }
        prev = Some(y);
    }
    Raster {
        width,
        height,
        pixels,
        min,
        max,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::GridSpec;

    #[test]
    fn heatmap_dimensions_and_header() {
        let g = GridSpec::new(2, 16).unwrap();
        let f = RealField::from_fn(g, |x| x[0].sin() + x[1]).unwrap();
        let r = render(&f);
        assert_eq!((r.width, r.height), (256, 256));
        let ppm = r.to_ppm();
        assert!(ppm.starts_with(b"P6\n256 256\n255\n"));
        assert_eq!(ppm.len(), 15 + 256 * 256 * 3);
        assert!(r.annotation(0.5).contains("max = "));
    }

    #[test]
    fn colormap_endpoints() {
        assert_eq!(colormap(0.0), [68, 1, 84]);
        assert_eq!(colormap(1.0), [253, 231, 37]);
    }

    #[test]
    fn polyline_marks_every_column() {
        let g = GridSpec::new(1, 64).unwrap();
        let f = RealField::from_fn(g, |x| x[0].cos()).unwrap();
        let r = render(&f);
        assert_eq!(r.height, 256);
        for x in 0..r.width {
            let dark = (0..r.height).any(|y| r.pixels[(y * r.width + x) * 3] == 20);
            assert!(dark, "column {x} empty");
        }
    }

    #[test]
    fn constant_field_renders() {
        let g = GridSpec::new(2, 8).unwrap();
        let r = render(&RealField::constant(g, 1.0).unwrap());
        assert!(r.pixels.chunks(3).all(|p| p == r.pixels[..3].as_ref()));
    }
}
