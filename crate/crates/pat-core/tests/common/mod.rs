#![allow(dead_code)]

use pat_core::medium::{Ball, Point};
use pat_core::spectral::{GridSpec, RealField};
use rand::Rng;

/// `amp * exp(-1 / (1 - |x - b|^2 / r^2))` inside the ball, zero outside.
pub fn unit_bump(x: &Point, b: &Point, r: f64, amp: f64) -> f64 {
    let d2 = (0..3).map(|a| (x[a] - b[a]).powi(2)).sum::<f64>();
    let s = 1.0 - d2 / (r * r);
    if s > 0.0 {
        amp * (-1.0 / s).exp()
    } else {
        0.0
    }
}

pub fn bumps(grid: &GridSpec, list: &[(Point, f64, f64)]) -> RealField {
    RealField::from_fn(*grid, |x| list.iter().map(|(b, r, a)| unit_bump(x, b, *r, *a)).sum())
        .expect("finite bumps")
}

/// Random sum of `count` bumps with supports inside `ball`.
pub fn random_bumps<R: Rng>(rng: &mut R, grid: &GridSpec, ball: &Ball, count: usize) -> RealField {
    let dim = grid.dim;
    let list: Vec<(Point, f64, f64)> = (0..count)
        .map(|_| {
            let r = ball.radius * rng.gen_range(0.15..0.45);
            let reach = ball.radius - r;
            let mut c = [0.0; 3];
            loop {
                for v in c.iter_mut().take(dim) {
                    *v = rng.gen_range(-reach..reach);
                }
                if (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt() < reach {
                    break;
                }
            }
            for (a, v) in c.iter_mut().enumerate() {
                *v += ball.center[a];
            }
            (c, r, rng.gen_range(-1.0..1.0))
        })
        .collect();
    bumps(grid, &list)
}

pub fn white_noise<R: Rng>(rng: &mut R, grid: &GridSpec) -> RealField {
    RealField::new(*grid, (0..grid.len()).map(|_| rng.gen_range(-1.0..1.0)).collect())
        .expect("finite noise")
}

pub fn ball_mask(grid: &GridSpec, ball: &Ball) -> Vec<bool> {
    (0..grid.len()).map(|i| ball.contains(&grid.coords(i))).collect()
}
