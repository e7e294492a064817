//! Deterministic synthetic scenes with exact boundary ground truth.
//!
//! A scene is a foreground region given by a predicate on continuous
//! coordinates (pixel `(x, y)` covers `[x, x+1) x [y, y+1)`). Pixels are
//! area-sampled on an 8x8 grid, so a pixel the boundary cuts through gets a
//! proportional blend of foreground and background. The ground truth marks
//! the inner boundary of the pixel-center mask: pixels whose center lies in
//! the closed region and that have a 4-neighbor whose center does not. The
//! image border itself is not a boundary.
//!
//! Regions whose edges sit on integer coordinates render as hard steps.
//! The suite scenes instead put straight edges through pixel centers, where
//! the half-covered pixel is the unique brightness midpoint of the edge.

use crate::imagecore::GrayImage;

const SUBSAMPLES: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSample {
    pub name: String,
    pub image: GrayImage,
    /// Binary `{0, 255}`.
    pub ground_truth: GrayImage,
}

struct Scene<F: Fn(f64, f64) -> bool> {
    width: usize,
    height: usize,
    inside: F,
}

impl<F: Fn(f64, f64) -> bool> Scene<F> {
    fn centered(&self, x: usize, y: usize) -> bool {
        (self.inside)(x as f64 + 0.5, y as f64 + 0.5)
    }

    fn coverage(&self, x: usize, y: usize) -> f64 {
        let step = 1.0 / SUBSAMPLES as f64;
        let mut hits = 0;
        for j in 0..SUBSAMPLES {
            for i in 0..SUBSAMPLES {
                let px = x as f64 + (i as f64 + 0.5) * step;
                let py = y as f64 + (j as f64 + 0.5) * step;
                if (self.inside)(px, py) {
                    hits += 1;
                }
            }
        }
        hits as f64 / (SUBSAMPLES * SUBSAMPLES) as f64
    }

    fn inner_boundary(&self) -> GrayImage {
        let (w, h) = (self.width, self.height);
        GrayImage::from_fn(w, h, |x, y| {
            if !self.centered(x, y) {
                return 0.0;
            }
            let touches_bg = (x > 0 && !self.centered(x - 1, y))
                || (x + 1 < w && !self.centered(x + 1, y))
                || (y > 0 && !self.centered(x, y - 1))
                || (y + 1 < h && !self.centered(x, y + 1));
            if touches_bg {
                255.0
            } else {
                0.0
            }
        })
        .expect("scene dimensions are valid")
    }

    fn render(
        &self,
        fg: impl Fn(usize, usize) -> f64,
        bg: impl Fn(usize, usize) -> f64,
    ) -> GrayImage {
        GrayImage::from_fn(self.width, self.height, |x, y| {
            let c = self.coverage(x, y);
            if c == 1.0 {
                fg(x, y)
            } else if c == 0.0 {
                bg(x, y)
            } else {
                c * fg(x, y) + (1.0 - c) * bg(x, y)
            }
        })
        .expect("scene dimensions are valid")
    }
}

fn scene(size: usize, inside: impl Fn(f64, f64) -> bool) -> Scene<impl Fn(f64, f64) -> bool> {
    Scene {
        width: size,
        height: size,
        inside,
    }
}

fn in_rect(px: f64, py: f64, x0: f64, y0: f64, x1: f64, y1: f64) -> bool {
    px >= x0 && px <= x1 && py >= y0 && py <= y1
}

/// Hard-edged white `side x side` square centered on a black canvas, its
/// edges on pixel boundaries.
pub fn white_square(size: usize, side: usize) -> SyntheticSample {
    let x0 = (size.saturating_sub(side) / 2) as f64;
    let x1 = x0 + side as f64;
    let s = scene(size, |px, py| px >= x0 && px < x1 && py >= x0 && py < x1);
    SyntheticSample {
        name: "square".to_owned(),
        image: s.render(|_, _| 255.0, |_, _| 0.0),
        ground_truth: s.inner_boundary(),
    }
}

/// Area-sampled square whose edges run through pixel centers.
pub fn soft_square(size: usize, side: usize, fg: f64, bg: f64) -> SyntheticSample {
    let x0 = (size.saturating_sub(side) / 2) as f64 + 0.5;
    let x1 = x0 + side as f64;
    let s = scene(size, |px, py| in_rect(px, py, x0, x0, x1, x1));
    SyntheticSample {
        name: "square".to_owned(),
        image: s.render(|_, _| fg, |_, _| bg),
        ground_truth: s.inner_boundary(),
    }
}

/// Area-sampled disk centered on the canvas.
pub fn disk(size: usize, radius: f64, fg: f64, bg: f64) -> SyntheticSample {
    let c = size as f64 / 2.0;
    let s = scene(size, |px, py| {
        let (dx, dy) = (px - c, py - c);
        dx * dx + dy * dy <= radius * radius
    });
    SyntheticSample {
        name: "disk".to_owned(),
        image: s.render(|_, _| fg, |_, _| bg),
        ground_truth: s.inner_boundary(),
    }
}

/// Off-center square over a horizontal intensity ramp.
pub fn ramp_square(size: usize) -> SyntheticSample {
    let (x0, y0) = ((size / 5) as f64 + 0.5, (size / 3) as f64 + 0.5);
    let side = (size / 2) as f64;
    let s = scene(size, |px, py| in_rect(px, py, x0, y0, x0 + side, y0 + side));
    let span = (size.max(2) - 1) as f64;
    SyntheticSample {
        name: "ramp-square".to_owned(),
        image: s.render(|_, _| 220.0, |x, _| 20.0 + 60.0 * x as f64 / span),
        ground_truth: s.inner_boundary(),
    }
}

/// Two separated rectangles of different contrast.
pub fn two_rects(size: usize) -> SyntheticSample {
    let q = (size / 8) as f64;
    let a = move |px: f64, py: f64| in_rect(px, py, q + 0.5, q + 0.5, 4.0 * q + 0.5, 7.0 * q + 0.5);
    let b = move |px: f64, py: f64| {
        in_rect(
            px,
            py,
            5.0 * q + 0.5,
            2.0 * q + 0.5,
            7.0 * q + 0.5,
            5.0 * q + 0.5,
        )
    };
    let scene_a = scene(size, a);
    let scene_b = scene(size, b);
    let union = scene(size, |px, py| a(px, py) || b(px, py));
    let image = GrayImage::from_fn(size, size, |x, y| {
        let (ca, cb) = (scene_a.coverage(x, y), scene_b.coverage(x, y));
        230.0 * ca + 170.0 * cb + 30.0 * (1.0 - ca - cb)
    })
    .expect("valid size");
    SyntheticSample {
        name: "two-rects".to_owned(),
        image,
        ground_truth: union.inner_boundary(),
    }
}

/// The standard four-scene suite at the given canvas size.
pub fn suite(size: usize) -> Vec<SyntheticSample> {
    vec![
        soft_square(size, size / 2, 255.0, 0.0),
        disk(size, size as f64 * 0.3, 200.0, 40.0),
        ramp_square(size),
        two_rects(size),
    ]
}
