//! Reference implementations shared by the integration tests. They are
//! deliberately naive and share no code with the library paths they check.

#![allow(dead_code)]

use qiedge::{GrayImage, Kernel};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub fn random_image(rng: &mut StdRng, w: usize, h: usize) -> GrayImage {
    let data = (0..w * h).map(|_| rng.random_range(0.0..=255.0)).collect();
    GrayImage::new(w, h, data).unwrap()
}

pub fn random_kernel(rng: &mut StdRng, radius: usize) -> Kernel {
    let side = 2 * radius + 1;
    let weights = (0..side * side)
        .map(|_| rng.random_range(-2.0..2.0))
        .collect();
    Kernel::new(radius, weights).unwrap()
}

/// Nested-loop correlation with clamp-to-edge reads.
pub fn brute_convolve(img: &GrayImage, kern: &Kernel) -> Vec<f64> {
    let (w, h) = (img.width() as i64, img.height() as i64);
    let k = kern.radius() as i64;
    let side = 2 * k + 1;
    let src = img.data();
    let wts = kern.weights();
    let mut out = vec![0.0; (w * h) as usize];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for j in -k..=k {
                for i in -k..=k {
                    let sx = (x + i).max(0).min(w - 1);
                    let sy = (y + j).max(0).min(h - 1);
                    acc += wts[((j + k) * side + (i + k)) as usize] * src[(sy * w + sx) as usize];
                }
            }
            out[(y * w + x) as usize] = acc;
        }
    }
    out
}

/// Hysteresis by fixpoint growth: start from strong pixels and repeatedly
/// absorb any above-low pixel touching the kept set, until nothing changes.
pub fn hysteresis_fixpoint(mag: &GrayImage, low: f64, high: f64) -> Vec<f64> {
    let (w, h) = (mag.width() as i64, mag.height() as i64);
    let v = mag.data();
    let mut kept: Vec<bool> = v.iter().map(|&m| m > high).collect();
    loop {
        let mut grew = false;
        for y in 0..h {
            for x in 0..w {
                let i = (y * w + x) as usize;
                if kept[i] || v[i] <= low {
                    continue;
                }
                let touches = (-1..=1).any(|dy: i64| {
                    (-1..=1).any(|dx: i64| {
                        let (nx, ny) = (x + dx, y + dy);
                        (dx, dy) != (0, 0)
                            && nx >= 0
                            && ny >= 0
                            && nx < w
                            && ny < h
                            && kept[(ny * w + nx) as usize]
                    })
                });
                if touches {
                    kept[i] = true;
                    grew = true;
                }
            }
        }
        if !grew {
            break;
        }
    }
    kept.into_iter()
        .map(|k| if k { 255.0 } else { 0.0 })
        .collect()
}

/// Pixels `>= level` as (x, y) coordinates.
pub fn pixels(img: &GrayImage, level: f64) -> Vec<(usize, usize)> {
    (0..img.height())
        .flat_map(|y| (0..img.width()).map(move |x| (x, y)))
        .filter(|&(x, y)| img.get(x, y) >= level)
        .collect()
}

/// Number of 8-connected components among pixels `>= level`.
pub fn components_8(img: &GrayImage, level: f64) -> usize {
    let (w, h) = img.dims();
    let mut seen = vec![false; w * h];
    let mut count = 0;
    for start in pixels(img, level) {
        let si = start.1 * w + start.0;
        if seen[si] {
            continue;
        }
        count += 1;
        seen[si] = true;
        let mut stack = vec![start];
        while let Some((x, y)) = stack.pop() {
            for dy in -1i64..=1 {
                for dx in -1i64..=1 {
                    let (nx, ny) = (x as i64 + dx, y as i64 + dy);
                    if nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 {
                        continue;
                    }
                    let (nx, ny) = (nx as usize, ny as usize);
                    let j = ny * w + nx;
                    if !seen[j] && img.get(nx, ny) >= level {
                        seen[j] = true;
                        stack.push((nx, ny));
                    }
                }
            }
        }
    }
    count
}

/// True when the background pixel `inside` cannot reach the image border
/// through 4-connected moves that avoid pixels `>= level`, i.e. the edge set
/// encloses it.
pub fn encloses(img: &GrayImage, level: f64, inside: (usize, usize)) -> bool {
    let (w, h) = img.dims();
    if img.get(inside.0, inside.1) >= level {
        return false;
    }
    let mut seen = vec![false; w * h];
    seen[inside.1 * w + inside.0] = true;
    let mut stack = vec![inside];
    while let Some((x, y)) = stack.pop() {
        if x == 0 || y == 0 || x == w - 1 || y == h - 1 {
            return false;
        }
        for (nx, ny) in [(x - 1, y), (x + 1, y), (x, y - 1), (x, y + 1)] {
            let j = ny * w + nx;
            if !seen[j] && img.get(nx, ny) < level {
                seen[j] = true;
                stack.push((nx, ny));
            }
        }
    }
    true
}
