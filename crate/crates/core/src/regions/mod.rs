//! Bounded regions of ℝ³, their sections along `e₃`, and boundary integrals.

pub mod mesh;
pub mod sampling;
pub mod zigzag;

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::intervals::IntervalUnion;

pub use mesh::{icosphere, TriangleMesh};
pub use sampling::{SampleEstimate, Sampler};
pub use zigzag::ZigzagPrism;

/// Minimum sampler budget for boundary-count integrals.
pub const MIN_COUNTING_BUDGET: usize = 10_000;
/// Counting integrals fail when more samples than this fraction are degenerate.
pub const MAX_DEGENERATE_FRACTION: f64 = 1e-3;

type V3 = [f64; 3];

#[derive(Debug, Clone)]
pub enum Region3D {
    Box { min: V3, max: V3 },
    Ball { center: V3, radius: f64 },
    /// Axis parallel to `e₃` through `center`.
    Cylinder { center: [f64; 2], radius: f64, z_min: f64, z_max: f64 },
    Zigzag(ZigzagPrism),
    Mesh(TriangleMesh),
}

/// `Λ_{x⊥} = {x₃ : (x⊥, x₃) ∈ Λ}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossSection {
    pub x_perp: [f64; 2],
    pub intervals: IntervalUnion,
    pub boundary_count: usize,
}

impl CrossSection {
    fn new(x_perp: [f64; 2], intervals: IntervalUnion) -> Self {
        let boundary_count = intervals.boundary_count();
        Self { x_perp, intervals, boundary_count }
    }
}

impl Region3D {
    pub fn cuboid(min: V3, max: V3) -> Result<Self> {
        if (0..3).any(|k| !(max[k] > min[k])) {
            return Err(Error::domain(format!("box corners must satisfy min < max, got {min:?} {max:?}")));
        }
        Ok(Region3D::Box { min, max })
    }

    pub fn unit_cube() -> Self {
        Region3D::Box { min: [0.0; 3], max: [1.0; 3] }
    }

    pub fn ball(center: V3, radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::domain(format!("radius must be > 0, got {radius}")));
        }
        Ok(Region3D::Ball { center, radius })
    }

    pub fn unit_ball() -> Self {
        Region3D::Ball { center: [0.0; 3], radius: 1.0 }
    }

    pub fn cylinder(center: [f64; 2], radius: f64, z_min: f64, z_max: f64) -> Result<Self> {
        if !(radius > 0.0) || !(z_max > z_min) {
            return Err(Error::domain(format!(
                "cylinder needs radius > 0 and z_min < z_max, got r = {radius}, z in [{z_min}, {z_max}]"
            )));
        }
        Ok(Region3D::Cylinder { center, radius, z_min, z_max })
    }

    pub fn shape_name(&self) -> &'static str {
        match self {
            Region3D::Box { .. } => "box",
            Region3D::Ball { .. } => "ball",
            Region3D::Cylinder { .. } => "cylinder",
            Region3D::Zigzag(_) => "zigzag",
            Region3D::Mesh(_) => "mesh",
        }
    }

    pub fn bounding_box(&self) -> (V3, V3) {
        match self {
            Region3D::Box { min, max } => (*min, *max),
            Region3D::Ball { center: c, radius: r } => {
                ([c[0] - r, c[1] - r, c[2] - r], [c[0] + r, c[1] + r, c[2] + r])
            }
            Region3D::Cylinder { center: c, radius: r, z_min, z_max } => {
                ([c[0] - r, c[1] - r, *z_min], [c[0] + r, c[1] + r, *z_max])
            }
            Region3D::Zigzag(z) => {
                let h = z.max_height();
                ([0.0, -h, -1.0], [1.0, h, 2.0])
            }
            Region3D::Mesh(m) => m.bounding_box(),
        }
    }

    /// The rectangle `[[x0, x1], [y0, y1]]` containing the projection onto
    /// the `x⊥` plane.
    pub fn footprint(&self) -> [[f64; 2]; 2] {
        let (lo, hi) = self.bounding_box();
        [[lo[0], hi[0]], [lo[1], hi[1]]]
    }

    pub fn cross_section(&self, x: [f64; 2]) -> Result<CrossSection> {
        let intervals = match self {
            Region3D::Box { min, max } => {
                if x[0] > min[0] && x[0] < max[0] && x[1] > min[1] && x[1] < max[1] {
                    IntervalUnion::single(min[2], max[2])?
                } else {
                    IntervalUnion::empty()
                }
            }
            Region3D::Ball { center: c, radius: r } => {
                let rho2 = (x[0] - c[0]).powi(2) + (x[1] - c[1]).powi(2);
                if rho2 < r * r {
                    let h = (r * r - rho2).sqrt();
                    IntervalUnion::single(c[2] - h, c[2] + h)?
                } else {
                    IntervalUnion::empty()
                }
            }
            Region3D::Cylinder { center: c, radius: r, z_min, z_max } => {
                if (x[0] - c[0]).hypot(x[1] - c[1]) < *r {
                    IntervalUnion::single(*z_min, *z_max)?
                } else {
                    IntervalUnion::empty()
                }
            }
            Region3D::Zigzag(z) => {
                if x[0] > 0.0 && x[0] < 1.0 {
                    z.section_at(x[1])
                } else {
                    IntervalUnion::empty()
                }
            }
            Region3D::Mesh(m) => m.cross_section(x)?,
        };
        Ok(CrossSection::new(x, intervals))
    }

    /// `∫_{∂Λ} |n·e₃| dH²`.
    pub fn perpendicular_area_integral(&self) -> f64 {
        match self {
            Region3D::Box { min, max } => 2.0 * (max[0] - min[0]) * (max[1] - min[1]),
            Region3D::Ball { radius, .. } | Region3D::Cylinder { radius, .. } => 2.0 * PI * radius * radius,
            Region3D::Zigzag(_) => 6.0,
            Region3D::Mesh(m) => m.perpendicular_area(),
        }
    }

    pub fn volume(&self) -> f64 {
        match self {
            Region3D::Box { min, max } => (0..3).map(|k| max[k] - min[k]).product(),
            Region3D::Ball { radius: r, .. } => 4.0 / 3.0 * PI * r.powi(3),
            Region3D::Cylinder { radius: r, z_min, z_max, .. } => PI * r * r * (z_max - z_min),
            Region3D::Zigzag(z) => z.volume(),
            Region3D::Mesh(m) => m.volume(),
        }
    }

    /// `H²(∂Λ)`.
    pub fn surface_area(&self) -> f64 {
        match self {
            Region3D::Box { min, max } => {
                let d: Vec<f64> = (0..3).map(|k| max[k] - min[k]).collect();
                2.0 * (d[0] * d[1] + d[1] * d[2] + d[2] * d[0])
            }
            Region3D::Ball { radius: r, .. } => 4.0 * PI * r * r,
            Region3D::Cylinder { radius: r, z_min, z_max, .. } => 2.0 * PI * r * (z_max - z_min + r),
            Region3D::Zigzag(z) => z.surface_area(),
            Region3D::Mesh(m) => m.area(),
        }
    }

    /// Negative inside, positive outside, magnitude the distance to `∂Λ`.
    pub fn signed_distance(&self, x: V3) -> Result<f64> {
        Ok(match self {
            Region3D::Box { min, max } => {
                let c: Vec<f64> = (0..3).map(|k| 0.5 * (min[k] + max[k])).collect();
                let q: Vec<f64> = (0..3).map(|k| (x[k] - c[k]).abs() - 0.5 * (max[k] - min[k])).collect();
                let outside = q.iter().map(|v| v.max(0.0).powi(2)).sum::<f64>().sqrt();
                outside + q[0].max(q[1]).max(q[2]).min(0.0)
            }
            Region3D::Ball { center: c, radius } => {
                ((x[0] - c[0]).powi(2) + (x[1] - c[1]).powi(2) + (x[2] - c[2]).powi(2)).sqrt() - radius
            }
            Region3D::Cylinder { center: c, radius, z_min, z_max } => {
                let radial = (x[0] - c[0]).hypot(x[1] - c[1]) - radius;
                let axial = (x[2] - 0.5 * (z_min + z_max)).abs() - 0.5 * (z_max - z_min);
                combine_product(radial, axial)
            }
            Region3D::Zigzag(z) => {
                let slab = (x[0] - 0.5).abs() - 0.5;
                combine_product(slab, z.signed_distance_2d(x[1], x[2]))
            }
            Region3D::Mesh(_) => {
                return Err(Error::Capability("signed distance is not implemented for meshes".into()))
            }
        })
    }

    /// `∫ g(Λ_{x⊥}) dx⊥` over the footprint, failed sections counted.
    pub fn integrate_sections<G>(&self, sampler: &Sampler, g: G) -> Result<SampleEstimate>
    where
        G: Fn(&CrossSection) -> f64 + Sync,
    {
        let rect = self.footprint();
        let area = (rect[0][1] - rect[0][0]) * (rect[1][1] - rect[1][0]);
        let values: Vec<Result<f64>> = sampler
            .points(rect)
            .par_iter()
            .map(|&p| self.cross_section(p).map(|cs| g(&cs)))
            .collect();
        let stochastic = matches!(sampler, Sampler::MonteCarlo { .. });
        sampling::reduce_samples(&values, area, stochastic, MAX_DEGENERATE_FRACTION, sampler.seed())
    }

    /// `∫ #∂(Λ_{x⊥}) dx⊥`, which equals the perpendicular area integral.
    pub fn counting_integral(&self, sampler: &Sampler) -> Result<SampleEstimate> {
        if sampler.budget() < MIN_COUNTING_BUDGET {
            return Err(Error::domain(format!(
                "counting integral needs at least {MIN_COUNTING_BUDGET} samples, got {}",
                sampler.budget()
            )));
        }
        self.integrate_sections(sampler, |cs| cs.boundary_count as f64)
    }

    /// `∫ |Λ_{x⊥}| dx⊥`, which equals the volume.
    pub fn section_measure_integral(&self, sampler: &Sampler) -> Result<SampleEstimate> {
        self.integrate_sections(sampler, |cs| cs.intervals.measure())
    }

    /// Monte Carlo volume of `{x : |d_Λ(x)| < r}`.
    pub fn tubular_volume(&self, r: f64, samples: usize, seed: u64) -> Result<SampleEstimate> {
        if !(r > 0.0) {
            return Err(Error::domain(format!("tube radius must be > 0, got {r}")));
        }
        if samples < 2 {
            return Err(Error::domain("tubular volume needs at least 2 samples"));
        }
        let (mut lo, mut hi) = self.bounding_box();
        for k in 0..3 {
            lo[k] -= r;
            hi[k] += r;
        }
        let measure: f64 = (0..3).map(|k| hi[k] - lo[k]).product();
        let values: Vec<Result<f64>> = sampling::uniform_points_3d(samples, seed, lo, hi)
            .par_iter()
            .map(|&x| self.signed_distance(x).map(|d| if d.abs() < r { 1.0 } else { 0.0 }))
            .collect();
        if let Some(Err(e)) = values.first() {
            return Err(e.clone());
        }
        sampling::reduce_samples(&values, measure, true, MAX_DEGENERATE_FRACTION, Some(seed))
    }
}

/// Signed distance to `A × B` from signed distances to `A` and `B`.
fn combine_product(da: f64, db: f64) -> f64 {
    if da <= 0.0 && db <= 0.0 {
        da.max(db)
    } else {
        da.max(0.0).hypot(db.max(0.0))
    }
}
