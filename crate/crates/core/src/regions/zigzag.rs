//! The zigzag prism `{x₁ ∈ (0,1), x₃ ∈ (−1,2), |x₂| < g₀(x₃)}`.
//!
//! On `[0, 1]` the profile `g₀` is a sawtooth made of consecutive blocks of
//! lengths `b_1, b_2, …` summing to one; on each block it rises with slope
//! one from 1 to `1 + b/2` and falls back. Outside it is `t + 1` on `[−1, 0]`
//! and `2 − t` on `[1, 2]`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::intervals::IntervalUnion;

use super::mesh::TriangleMesh;

/// Allowed deviation of the block total from one.
pub const BLOCK_SUM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZigzagPrism {
    blocks: Vec<f64>,
    starts: Vec<f64>,
    /// Vertices `(t, g₀(t))` of the profile, sorted by `t`.
    profile: Vec<[f64; 2]>,
}

impl ZigzagPrism {
    /// Builds the prism from block lengths, which must be nonnegative and sum
    /// to one.
    pub fn from_blocks(blocks: Vec<f64>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::validation("zigzag needs at least one block"));
        }
        if let Some(b) = blocks.iter().find(|b| !(**b >= 0.0) || !b.is_finite()) {
            return Err(Error::validation(format!("zigzag block lengths must be >= 0, got {b}")));
        }
        let total: f64 = blocks.iter().sum();
        if (total - 1.0).abs() > BLOCK_SUM_TOL {
            return Err(Error::validation(format!("zigzag blocks must sum to 1, got {total}")));
        }
        let mut starts = Vec::with_capacity(blocks.len());
        let mut s = 0.0;
        for b in &blocks {
            starts.push(s);
            s += b;
        }
        let mut profile = vec![[-1.0, 0.0], [0.0, 1.0]];
        for (&s, &b) in starts.iter().zip(&blocks) {
            if b > 0.0 {
                profile.push([s + 0.5 * b, 1.0 + 0.5 * b]);
                profile.push([s + b, 1.0]);
            }
        }
        profile.last_mut().unwrap()[0] = 1.0;
        profile.push([2.0, 0.0]);
        Ok(Self { blocks, starts, profile })
    }

    pub fn blocks(&self) -> &[f64] {
        &self.blocks
    }

    pub fn profile(&self) -> &[[f64; 2]] {
        &self.profile
    }

    /// Largest value of `g₀`.
    pub fn max_height(&self) -> f64 {
        1.0 + 0.5 * self.blocks.iter().fold(0.0f64, |m, &b| m.max(b))
    }

    /// Half-width below which cross sections at `|x₂| > 1` feel the
    /// truncation: the smallest positive block over two.
    pub fn resolved_half_width(&self) -> f64 {
        0.5 * self.blocks.iter().copied().filter(|&b| b > 0.0).fold(f64::INFINITY, f64::min)
    }

    pub fn g0(&self, t: f64) -> Result<f64> {
        if !(-1.0..=2.0).contains(&t) {
            return Err(Error::domain(format!("g0 is defined on [-1, 2], got {t}")));
        }
        Ok(self.g0_unchecked(t))
    }

    pub(crate) fn g0_unchecked(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return t + 1.0;
        }
        if t >= 1.0 {
            return 2.0 - t;
        }
        let i = self.starts.partition_point(|&s| s <= t).saturating_sub(1);
        let (s, b) = (self.starts[i], self.blocks[i]);
        1.0 + (t - s).min(s + b - t).max(0.0)
    }

    /// `∫_{−1}^{2} g₀ = 2 + Σ b²/4`.
    pub fn integral_g0(&self) -> f64 {
        2.0 + 0.25 * self.blocks.iter().map(|b| b * b).sum::<f64>()
    }

    pub fn volume(&self) -> f64 {
        2.0 * self.integral_g0()
    }

    /// Two flat faces of area `2∫g₀` plus two walls of slope one.
    pub fn surface_area(&self) -> f64 {
        4.0 * self.integral_g0() + 6.0 * std::f64::consts::SQRT_2
    }

    /// The section `{x₃ : |x₂| < g₀(x₃)}` for `x₁ ∈ (0, 1)`.
    pub fn section_at(&self, x2: f64) -> IntervalUnion {
        let a = x2.abs();
        if a < 1.0 {
            return IntervalUnion::single(a - 1.0, 2.0 - a).expect("nonempty section");
        }
        let tau = a - 1.0;
        let raw: Vec<(f64, f64)> = self
            .starts
            .iter()
            .zip(&self.blocks)
            .filter(|(_, &b)| b > 2.0 * tau)
            .map(|(&s, &b)| (s + tau, s + b - tau))
            .collect();
        IntervalUnion::normalize(&raw, 0.0).expect("disjoint block sections")
    }

    /// Signed distance in the `(x₂, x₃)` plane to the profile polygon.
    pub fn signed_distance_2d(&self, x2: f64, x3: f64) -> f64 {
        let p = [x2.abs(), x3];
        let inside = x3 > -1.0 && x3 < 2.0 && p[0] < self.g0_unchecked(x3);
        // an upper bound from the point of the wall at height clamp(x3)
        let c = x3.clamp(-1.0, 2.0);
        let mut best = dist(p, [self.g0_unchecked(c), c]);
        let lo = self.profile.partition_point(|v| v[0] < x3 - best).saturating_sub(1);
        let hi = self.profile.partition_point(|v| v[0] <= x3 + best).min(self.profile.len() - 1);
        for k in lo..hi {
            let a = [self.profile[k][1], self.profile[k][0]];
            let b = [self.profile[k + 1][1], self.profile[k + 1][0]];
            best = best.min(segment_distance(p, a, b));
        }
        if inside {
            -best
        } else {
            best
        }
    }

    /// Closed triangle mesh of the prism, outward oriented.
    pub fn to_mesh(&self) -> Result<TriangleMesh> {
        let m = self.profile.len() - 1;
        let mut vertices = Vec::new();
        // right chain index (x1 side s, profile k); left chain shares ends
        let mut right = vec![[0usize; 2]; m + 1];
        let mut left = vec![[0usize; 2]; m + 1];
        for (s, x1) in [0.0, 1.0].into_iter().enumerate() {
            for k in 0..=m {
                let [t, g] = self.profile[k];
                right[k][s] = vertices.len();
                vertices.push([x1, g, t]);
                if k == 0 || k == m {
                    left[k][s] = right[k][s];
                } else {
                    left[k][s] = vertices.len();
                    vertices.push([x1, -g, t]);
                }
            }
        }
        let mut tris = Vec::new();
        for k in 0..m {
            // caps: counterclockwise in (x2, x3) gives +e1
            let quad = [left[k], right[k], right[k + 1], left[k + 1]];
            let mut cap = |s: usize, flip: bool| {
                let ids: Vec<usize> = quad.iter().map(|v| v[s]).collect();
                let mut push = |a: usize, b: usize, c: usize| {
                    if a != b && b != c && a != c {
                        tris.push(if flip { [a, c, b] } else { [a, b, c] });
                    }
                };
                push(ids[0], ids[1], ids[2]);
                push(ids[0], ids[2], ids[3]);
            };
            cap(1, false);
            cap(0, true);
            let (r0, r1) = (right[k], right[k + 1]);
            tris.push([r0[0], r1[1], r0[1]]);
            tris.push([r0[0], r1[0], r1[1]]);
            let (l0, l1) = (left[k], left[k + 1]);
            tris.push([l0[0], l0[1], l1[1]]);
            tris.push([l0[0], l1[1], l1[0]]);
        }
        TriangleMesh::new(vertices, tris)
    }
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

fn segment_distance(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let d = [b[0] - a[0], b[1] - a[1]];
    let len2 = d[0] * d[0] + d[1] * d[1];
    let t = if len2 > 0.0 {
        (((p[0] - a[0]) * d[0] + (p[1] - a[1]) * d[1]) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    dist(p, [a[0] + t * d[0], a[1] + t * d[1]])
}
