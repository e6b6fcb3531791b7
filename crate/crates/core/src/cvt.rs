//! Locational optimisation over the barrier region.
//!
//! Monte Carlo centroidal Voronoi tessellation: sample the region according to
//! a density, assign samples to the nearest generator, and move generators
//! toward their cell centroids with the counter-weighted update
//!
//! ```text
//! x_i ← ((α1·j_i + β1)/(j_i + 1))·x_i + ((α2·j_i + β2)/(j_i + 1))·u_i,   j_i ← j_i + 1
//! ```
//!
//! where `u_i` is the mean of the samples closest to `x_i`. Cells that receive
//! no samples are left untouched and their counters do not advance.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::Vector3;
use crate::random::{stream_rng, unit};

/// Proposal count over which the sampler's acceptance rate is checked.
pub const STALL_WINDOW: u64 = 1_000_000;
/// Minimum acceptable acceptance rate for the rejection sampler.
pub const STALL_MIN_RATE: f64 = 1e-3;

const WEIGHT_SUM_TOL: f64 = 1e-12;
const MEMBERSHIP_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CvtError {
    #[error("rejection sampler stalled: {accepted} of {proposals} proposals accepted")]
    RejectionStall { accepted: u64, proposals: u64 },
    #[error("invalid region: {0}")]
    InvalidRegion(String),
    #[error("invalid density: {0}")]
    InvalidDensity(String),
    #[error("invalid Lloyd configuration: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionShape {
    /// Horizontal rectangle at the altitude of `center.z`.
    Planar,
    /// Axis-aligned box; zero half-extents collapse that axis.
    Volume,
}

/// The deployment domain: an axis-aligned box that drifts at `velocity`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BarrierRegion {
    pub shape: RegionShape,
    pub center: Vector3,
    pub half_extents: Vector3,
    #[serde(default)]
    pub velocity: Vector3,
}

impl BarrierRegion {
    pub fn planar(center: Vector3, half_x: f64, half_y: f64, velocity: Vector3) -> Result<Self, CvtError> {
        let r = BarrierRegion {
            shape: RegionShape::Planar,
            center,
            half_extents: Vector3::new(half_x, half_y, 0.0),
            velocity,
        };
        r.validate()?;
        Ok(r)
    }

    pub fn volume(center: Vector3, half_extents: Vector3, velocity: Vector3) -> Result<Self, CvtError> {
        let r = BarrierRegion {
            shape: RegionShape::Volume,
            center,
            half_extents,
            velocity,
        };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<(), CvtError> {
        let bad = |m: &str| Err(CvtError::InvalidRegion(m.to_string()));
        if !self.center.is_finite() || !self.half_extents.is_finite() || !self.velocity.is_finite() {
            return bad("non-finite center, half-extents or velocity");
        }
        let h = self.half_extents;
        if h.x < 0.0 || h.y < 0.0 || h.z < 0.0 {
            return bad("half-extents must be non-negative");
        }
        match self.shape {
            RegionShape::Planar => {
                if h.x <= 0.0 || h.y <= 0.0 {
                    return bad("planar region needs positive x and y half-extents");
                }
                if h.z != 0.0 {
                    return bad("planar region must have zero z half-extent");
                }
            }
            RegionShape::Volume => {
                if h.x <= 0.0 && h.y <= 0.0 && h.z <= 0.0 {
                    return bad("volume region needs at least one positive half-extent");
                }
            }
        }
        Ok(())
    }

    /// Axes along which the region has extent, in x, y, z order.
    pub fn active_axes(&self) -> impl Iterator<Item = usize> + '_ {
        (0..3).filter(move |&a| self.half_extents[a] > 0.0)
    }

    pub fn min_corner(&self) -> Vector3 {
        self.center - self.half_extents
    }

    pub fn max_corner(&self) -> Vector3 {
        self.center + self.half_extents
    }

    pub fn max_half_extent(&self) -> f64 {
        self.half_extents.x.max(self.half_extents.y).max(self.half_extents.z)
    }

    pub fn contains(&self, p: Vector3) -> bool {
        (0..3).all(|a| (p[a] - self.center[a]).abs() <= self.half_extents[a] + MEMBERSHIP_SLACK)
    }

    /// Nearest member of the region (clamps every axis; for a planar region
    /// this also puts the point back on the plane).
    pub fn project(&self, p: Vector3) -> Vector3 {
        let lo = self.min_corner();
        let hi = self.max_corner();
        Vector3::new(p.x.clamp(lo.x, hi.x), p.y.clamp(lo.y, hi.y), p.z.clamp(lo.z, hi.z))
    }

    /// Same region with its center advanced by `velocity · dt`.
    pub fn translated(&self, dt: f64) -> BarrierRegion {
        BarrierRegion {
            center: self.center + self.velocity * dt,
            ..*self
        }
    }

    pub fn measure(&self) -> f64 {
        self.active_axes().map(|a| 2.0 * self.half_extents[a]).product()
    }

    fn uniform_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Vector3 {
        let mut c = self.center.to_array();
        for a in 0..3 {
            let h = self.half_extents[a];
            if h > 0.0 {
                c[a] += h * (2.0 * unit(rng) - 1.0);
            }
        }
        Vector3::from(c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }
}

/// Importance density φ(q) over the region.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DensityField {
    #[default]
    Uniform,
    /// `floor + exp(−‖q − center‖² / (2σ²))`
    Gaussian { center: Vector3, sigma: f64, floor: f64 },
    /// Piecewise constant across a plane normal to `axis`.
    Step { axis: Axis, threshold: f64, below: f64, above: f64 },
}

impl DensityField {
    pub fn value(&self, q: Vector3) -> f64 {
        match *self {
            DensityField::Uniform => 1.0,
            DensityField::Gaussian { center, sigma, floor } => {
                floor + libm::exp(-q.distance_squared(center) / (2.0 * sigma * sigma))
            }
            DensityField::Step { axis, threshold, below, above } => {
                if q[axis.index()] < threshold {
                    below
                } else {
                    above
                }
            }
        }
    }

    /// An upper bound of `value` over all of space.
    pub fn upper_bound(&self) -> f64 {
        match *self {
            DensityField::Uniform => 1.0,
            DensityField::Gaussian { floor, .. } => floor + 1.0,
            DensityField::Step { below, above, .. } => below.max(above),
        }
    }

    pub fn validate(&self) -> Result<(), CvtError> {
        let bad = |m: &str| Err(CvtError::InvalidDensity(m.to_string()));
        match *self {
            DensityField::Uniform => Ok(()),
            DensityField::Gaussian { center, sigma, floor } => {
                if !center.is_finite() || !(sigma.is_finite() && sigma > 0.0) {
                    return bad("gaussian needs a finite center and positive sigma");
                }
                if !(floor.is_finite() && floor >= 0.0) {
                    return bad("gaussian floor must be non-negative");
                }
                Ok(())
            }
            DensityField::Step { threshold, below, above, .. } => {
                if !threshold.is_finite() || !(below.is_finite() && above.is_finite()) {
                    return bad("step density values must be finite");
                }
                if below < 0.0 || above < 0.0 || below.max(above) <= 0.0 {
                    return bad("step density must be non-negative and not identically zero");
                }
                Ok(())
            }
        }
    }
}

/// Draws `count` points from `density` restricted to `region`.
///
/// Each proposal consumes one uniform per active axis (x, then y, then z)
/// followed by one acceptance uniform; the proposal is kept when
/// `u · bound < φ(q)`.
pub fn sample_region<R: Rng + ?Sized>(
    region: &BarrierRegion,
    density: &DensityField,
    count: usize,
    rng: &mut R,
) -> Result<Vec<Vector3>, CvtError> {
    let bound = density.upper_bound();
    let mut out = Vec::with_capacity(count);
    let (mut proposals, mut accepted) = (0u64, 0u64);
    while out.len() < count {
        let q = region.uniform_point(rng);
        let u = unit(rng);
        proposals += 1;
        if u * bound < density.value(q) {
            accepted += 1;
            out.push(q);
        }
        if proposals % STALL_WINDOW == 0 && (accepted as f64) < STALL_MIN_RATE * proposals as f64 {
            return Err(CvtError::RejectionStall { accepted, proposals });
        }
    }
    Ok(out)
}

/// Index of the generator nearest to `q`; ties go to the lowest index.
#[inline]
pub fn nearest_generator(q: Vector3, generators: &[Vector3]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, g) in generators.iter().enumerate() {
        let d = q.distance_squared(*g);
        if d < best_d {
            best = i;
            best_d = d;
        }
    }
    best
}

/// Voronoi partition of `samples`: for each generator, the indices of the
/// samples closest to it (in increasing sample order).
pub fn assign_to_nearest(samples: &[Vector3], generators: &[Vector3]) -> Vec<Vec<usize>> {
    assert!(!generators.is_empty(), "at least one generator is required");
    let mut cells = vec![Vec::new(); generators.len()];
    for (s, q) in samples.iter().enumerate() {
        cells[nearest_generator(*q, generators)].push(s);
    }
    cells
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VoronoiCellStats {
    /// Number of samples in the cell, the Monte Carlo mass proxy.
    pub count: usize,
    /// Arithmetic mean of the cell's samples; `None` for an empty cell.
    pub centroid: Option<Vector3>,
}

/// Per-cell sample counts and centroids. Sums run in sample-index order.
pub fn cell_stats(samples: &[Vector3], partition: &[Vec<usize>]) -> Vec<VoronoiCellStats> {
    partition
        .iter()
        .map(|cell| {
            if cell.is_empty() {
                return VoronoiCellStats { count: 0, centroid: None };
            }
            let sum = cell.iter().fold(Vector3::ZERO, |acc, &s| acc + samples[s]);
            VoronoiCellStats {
                count: cell.len(),
                centroid: Some(sum / cell.len() as f64),
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LloydConfig {
    /// Number of generators.
    pub points: usize,
    /// Samples drawn per iteration.
    pub samples: usize,
    pub alpha1: f64,
    pub alpha2: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub max_iterations: usize,
    /// Stop once no point moves farther than this in one iteration (m).
    pub movement_tolerance: f64,
    pub seed: u64,
}

impl LloydConfig {
    pub const DEFAULT_SAMPLES_PER_POINT: usize = 200;
    pub const DEFAULT_MAX_ITERATIONS: usize = 200;
    pub const DEFAULT_MOVEMENT_TOLERANCE: f64 = 1e-3;

    /// Classic Lloyd step (`α1 = β1 = 0`) with the default sampling budget.
    pub fn new(points: usize) -> Self {
        LloydConfig {
            points,
            samples: Self::DEFAULT_SAMPLES_PER_POINT * points,
            alpha1: 0.0,
            alpha2: 1.0,
            beta1: 0.0,
            beta2: 1.0,
            max_iterations: Self::DEFAULT_MAX_ITERATIONS,
            movement_tolerance: Self::DEFAULT_MOVEMENT_TOLERANCE,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<(), CvtError> {
        let bad = |m: String| Err(CvtError::InvalidConfig(m));
        let finite = [self.alpha1, self.alpha2, self.beta1, self.beta2, self.movement_tolerance];
        if finite.iter().any(|v| !v.is_finite()) {
            return bad("weights and tolerance must be finite".into());
        }
        if (self.alpha1 + self.alpha2 - 1.0).abs() > WEIGHT_SUM_TOL {
            return bad(format!("alpha1 + alpha2 = {} (must be 1)", self.alpha1 + self.alpha2));
        }
        if (self.beta1 + self.beta2 - 1.0).abs() > WEIGHT_SUM_TOL {
            return bad(format!("beta1 + beta2 = {} (must be 1)", self.beta1 + self.beta2));
        }
        if self.alpha2 <= 0.0 || self.beta2 <= 0.0 {
            return bad("alpha2 and beta2 must be positive".into());
        }
        if self.points == 0 {
            return bad("at least one point is required".into());
        }
        if self.samples < self.points {
            return bad(format!("samples ({}) must be at least points ({})", self.samples, self.points));
        }
        if self.max_iterations == 0 {
            return bad("max_iterations must be positive".into());
        }
        if self.movement_tolerance < 0.0 {
            return bad("movement_tolerance must be non-negative".into());
        }
        Ok(())
    }
}

/// Generator positions and their update counters `j_i` (all start at 1).
#[derive(Debug, Clone, PartialEq)]
pub struct LloydState {
    pub points: Vec<Vector3>,
    pub counters: Vec<u64>,
}

impl LloydState {
    pub fn new(points: Vec<Vector3>) -> Self {
        let counters = vec![1; points.len()];
        LloydState { points, counters }
    }
}

/// One generator update: returns the new position and the advanced counter.
pub fn lloyd_point_update(x: Vector3, u: Vector3, counter: u64, config: &LloydConfig) -> (Vector3, u64) {
    let j = counter as f64;
    let keep = (config.alpha1 * j + config.beta1) / (j + 1.0);
    let pull = (config.alpha2 * j + config.beta2) / (j + 1.0);
    (x * keep + u * pull, counter + 1)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LloydIteration {
    /// Largest distance any generator moved during the iteration.
    pub max_movement: f64,
    pub stats: Vec<VoronoiCellStats>,
}

/// Iterative driver; exposes single steps so callers can trace a run.
#[derive(Debug, Clone)]
pub struct LloydSolver<'a> {
    region: &'a BarrierRegion,
    density: &'a DensityField,
    config: &'a LloydConfig,
    state: LloydState,
    last_samples: Vec<Vector3>,
}

impl<'a> LloydSolver<'a> {
    /// Starts from `initial`, projected onto the region.
    pub fn new(
        region: &'a BarrierRegion,
        density: &'a DensityField,
        config: &'a LloydConfig,
        initial: Vec<Vector3>,
    ) -> Result<Self, CvtError> {
        config.validate()?;
        region.validate()?;
        density.validate()?;
        if initial.len() != config.points {
            return Err(CvtError::InvalidConfig(format!(
                "{} initial points supplied for {} generators",
                initial.len(),
                config.points
            )));
        }
        let points = initial.into_iter().map(|p| region.project(p)).collect();
        Ok(LloydSolver {
            region,
            density,
            config,
            state: LloydState::new(points),
            last_samples: Vec::new(),
        })
    }

    pub fn state(&self) -> &LloydState {
        &self.state
    }

    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<LloydIteration, CvtError> {
        let samples = sample_region(self.region, self.density, self.config.samples, rng)?;
        let partition = assign_to_nearest(&samples, &self.state.points);
        let stats = cell_stats(&samples, &partition);
        let mut max_movement: f64 = 0.0;
        for (i, cell) in stats.iter().enumerate() {
            let Some(u) = cell.centroid else { continue };
            let (x, j) = lloyd_point_update(self.state.points[i], u, self.state.counters[i], self.config);
            let x = self.region.project(x);
            max_movement = max_movement.max(x.distance(self.state.points[i]));
            self.state.points[i] = x;
            self.state.counters[i] = j;
        }
        self.last_samples = samples;
        Ok(LloydIteration { max_movement, stats })
    }

    /// Runs until the movement tolerance or the iteration cap is reached.
    pub fn run<R: Rng + ?Sized>(mut self, rng: &mut R) -> Result<LloydOutcome, CvtError> {
        let mut iterations = 0;
        let mut converged = false;
        while iterations < self.config.max_iterations {
            let it = self.step(rng)?;
            iterations += 1;
            if it.max_movement < self.config.movement_tolerance {
                converged = true;
                break;
            }
        }
        Ok(self.finish(iterations, converged))
    }

    pub fn finish(self, iterations: usize, converged: bool) -> LloydOutcome {
        let partition = assign_to_nearest(&self.last_samples, &self.state.points);
        let residual_stats = cell_stats(&self.last_samples, &partition);
        LloydOutcome {
            points: self.state.points,
            counters: self.state.counters,
            iterations,
            converged,
            residual_stats,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LloydOutcome {
    pub points: Vec<Vector3>,
    pub counters: Vec<u64>,
    pub iterations: usize,
    pub converged: bool,
    /// Cell statistics of the final sample batch against the final points.
    pub residual_stats: Vec<VoronoiCellStats>,
}

/// Full Lloyd run seeded from `config.seed`; the initial generators are the
/// first `points` draws from the density.
pub fn lloyd_run(region: &BarrierRegion, density: &DensityField, config: &LloydConfig) -> Result<LloydOutcome, CvtError> {
    let mut rng = stream_rng(config.seed, 0);
    lloyd_run_with_rng(region, density, config, &mut rng)
}

pub fn lloyd_run_with_rng<R: Rng + ?Sized>(
    region: &BarrierRegion,
    density: &DensityField,
    config: &LloydConfig,
    rng: &mut R,
) -> Result<LloydOutcome, CvtError> {
    config.validate()?;
    let init = sample_region(region, density, config.points, rng)?;
    LloydSolver::new(region, density, config, init)?.run(rng)
}

/// Monte Carlo multicenter cost: mean squared distance from each evaluation
/// sample to its nearest generator.
pub fn coverage_cost(generators: &[Vector3], eval_samples: &[Vector3]) -> f64 {
    assert!(!eval_samples.is_empty(), "coverage cost needs evaluation samples");
    let total: f64 = eval_samples
        .iter()
        .map(|q| q.distance_squared(generators[nearest_generator(*q, generators)]))
        .sum();
    total / eval_samples.len() as f64
}

/// Per-generator `M_i·(c_i − p_i)`; zero for empty cells.
pub fn cvt_gradient(generators: &[Vector3], stats: &[VoronoiCellStats]) -> Vec<Vector3> {
    generators
        .iter()
        .zip(stats)
        .map(|(p, s)| match s.centroid {
            Some(c) => (c - *p) * s.count as f64,
            None => Vector3::ZERO,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::stream_rng;

    fn unit_square() -> BarrierRegion {
        BarrierRegion::volume(Vector3::new(0.5, 0.5, 0.0), Vector3::new(0.5, 0.5, 0.0), Vector3::ZERO).unwrap()
    }

    #[test]
    fn region_validation() {
        assert!(BarrierRegion::planar(Vector3::ZERO, 1.0, 0.0, Vector3::ZERO).is_err());
        assert!(BarrierRegion::volume(Vector3::ZERO, Vector3::ZERO, Vector3::ZERO).is_err());
        assert!(BarrierRegion::volume(Vector3::ZERO, Vector3::new(-1.0, 1.0, 1.0), Vector3::ZERO).is_err());
        let mut r = BarrierRegion::planar(Vector3::ZERO, 1.0, 1.0, Vector3::ZERO).unwrap();
        r.half_extents.z = 1.0;
        assert!(r.validate().is_err());
    }

    #[test]
    fn samples_are_members() {
        let planar = BarrierRegion::planar(Vector3::new(3.0, -2.0, 5.0), 4.0, 2.0, Vector3::X).unwrap();
        let mut rng = stream_rng(11, 0);
        for q in sample_region(&planar, &DensityField::Uniform, 5000, &mut rng).unwrap() {
            assert!(planar.contains(q));
            assert_eq!(q.z, 5.0);
        }
        let gauss = DensityField::Gaussian {
            center: Vector3::new(3.0, -2.0, 5.0),
            sigma: 0.5,
            floor: 0.0,
        };
        for q in sample_region(&planar, &gauss, 2000, &mut rng).unwrap() {
            assert!(planar.contains(q));
        }
    }

    #[test]
    fn uniform_sample_mean_is_center() {
        let mut rng = stream_rng(5, 0);
        let pts = sample_region(&unit_square(), &DensityField::Uniform, 100_000, &mut rng).unwrap();
        let mean = pts.iter().fold(Vector3::ZERO, |a, p| a + *p) / pts.len() as f64;
        assert!((mean.x - 0.5).abs() < 0.01 && (mean.y - 0.5).abs() < 0.01);
    }

    #[test]
    fn zero_density_zone_is_never_sampled() {
        let d = DensityField::Step {
            axis: Axis::X,
            threshold: 0.5,
            below: 0.0,
            above: 1.0,
        };
        let mut rng = stream_rng(9, 0);
        let pts = sample_region(&unit_square(), &d, 10_000, &mut rng).unwrap();
        assert!(pts.iter().all(|p| p.x >= 0.5));
    }

    #[test]
    fn pathological_density_stalls() {
        let d = DensityField::Step {
            axis: Axis::X,
            threshold: 50.0,
            below: 0.0,
            above: 1.0,
        };
        let mut rng = stream_rng(9, 0);
        let err = sample_region(&unit_square(), &d, 10, &mut rng).unwrap_err();
        assert_eq!(
            err,
            CvtError::RejectionStall {
                accepted: 0,
                proposals: STALL_WINDOW
            }
        );
    }

    #[test]
    fn assignment_examples() {
        let samples = [Vector3::ZERO, Vector3::new(0.6, 0.0, 0.0), Vector3::new(-3.0, 1.0, 0.0)];
        assert_eq!(assign_to_nearest(&samples, &[Vector3::Z]), vec![vec![0, 1, 2]]);
        let gens = [Vector3::new(-1.0, 0.0, 0.0), Vector3::new(1.0, 0.0, 0.0)];
        let p = assign_to_nearest(&samples, &gens);
        assert_eq!(p, vec![vec![0, 2], vec![1]]);
    }

    #[test]
    fn cell_stats_examples() {
        let samples = [Vector3::ZERO, Vector3::new(2.0, 0.0, 0.0), Vector3::new(7.0, 1.0, 2.0)];
        let stats = cell_stats(&samples, &[vec![0, 1], vec![], vec![2]]);
        assert_eq!(stats[0].count, 2);
        assert_eq!(stats[0].centroid, Some(Vector3::new(1.0, 0.0, 0.0)));
        assert_eq!(stats[1], VoronoiCellStats { count: 0, centroid: None });
        assert_eq!(stats[2].centroid, Some(samples[2]));
        let total: usize = stats.iter().map(|s| s.count).sum();
        assert_eq!(total, samples.len());
    }

    #[test]
    fn point_update_examples() {
        let x = Vector3::new(1.0, 2.0, 3.0);
        let u = Vector3::new(-1.0, 0.0, 5.0);
        let classic = LloydConfig::new(1);
        for j in [1, 2, 17] {
            assert_eq!(lloyd_point_update(x, u, j, &classic), (u, j + 1));
        }
        let half = LloydConfig {
            alpha1: 0.5,
            alpha2: 0.5,
            beta1: 0.5,
            beta2: 0.5,
            ..LloydConfig::new(1)
        };
        let (mid, j) = lloyd_point_update(x, u, 1, &half);
        assert_eq!(j, 2);
        assert!((mid - (x + u) * 0.5).norm() < 1e-15);
        assert_eq!(lloyd_point_update(x, x, 4, &half), (x, 5));
    }

    #[test]
    fn config_validation() {
        assert!(LloydConfig::new(3).validate().is_ok());
        let bad_sum = LloydConfig {
            alpha1: 0.3,
            ..LloydConfig::new(3)
        };
        assert!(bad_sum.validate().is_err());
        let zero_pull = LloydConfig {
            alpha1: 1.0,
            alpha2: 0.0,
            ..LloydConfig::new(3)
        };
        assert!(zero_pull.validate().is_err());
        let few = LloydConfig {
            samples: 2,
            ..LloydConfig::new(3)
        };
        assert!(few.validate().is_err());
        assert!(LloydConfig::new(0).validate().is_err());
    }

    #[test]
    fn single_generator_converges_to_center() {
        let region = BarrierRegion::volume(Vector3::new(1.0, 2.0, 3.0), Vector3::new(2.0, 1.0, 0.5), Vector3::ZERO).unwrap();
        let config = LloydConfig {
            samples: 20_000,
            seed: 4,
            ..LloydConfig::new(1)
        };
        let out = lloyd_run(&region, &DensityField::Uniform, &config).unwrap();
        assert!(out.points[0].distance(region.center) < 0.02 * region.max_half_extent());
    }

    #[test]
    fn two_generators_on_segment() {
        let seg = BarrierRegion::volume(Vector3::new(0.5, 0.0, 0.0), Vector3::new(0.5, 0.0, 0.0), Vector3::ZERO).unwrap();
        let config = LloydConfig { seed: 1, ..LloydConfig::new(2) };
        let out = lloyd_run(&seg, &DensityField::Uniform, &config).unwrap();
        let mut xs: Vec<f64> = out.points.iter().map(|p| p.x).collect();
        xs.sort_by(f64::total_cmp);
        assert!((xs[0] - 0.25).abs() < 0.05 && (xs[1] - 0.75).abs() < 0.05, "{xs:?}");
    }

    #[test]
    fn empty_cells_keep_point_and_counter() {
        let region = unit_square();
        let config = LloydConfig::new(2);
        // coincident generators: every tie goes to index 0, so cell 1 stays empty
        let init = vec![Vector3::new(0.5, 0.5, 0.0), Vector3::new(0.5, 0.5, 0.0)];
        let mut solver = LloydSolver::new(&region, &DensityField::Uniform, &config, init).unwrap();
        let mut rng = stream_rng(2, 0);
        let it = solver.step(&mut rng).unwrap();
        assert_eq!(it.stats[1].count, 0);
        assert_eq!(solver.state().counters, vec![2, 1]);
        assert_eq!(solver.state().points[1], Vector3::new(0.5, 0.5, 0.0));
    }

    #[test]
    fn counters_track_nonempty_iterations() {
        let region = unit_square();
        let config = LloydConfig::new(6);
        let mut rng = stream_rng(8, 0);
        let init = sample_region(&region, &DensityField::Uniform, 6, &mut rng).unwrap();
        let mut solver = LloydSolver::new(&region, &DensityField::Uniform, &config, init).unwrap();
        let mut nonempty = vec![0u64; 6];
        for _ in 0..15 {
            let it = solver.step(&mut rng).unwrap();
            for (n, s) in nonempty.iter_mut().zip(&it.stats) {
                *n += u64::from(s.count > 0);
            }
        }
        let expected: Vec<u64> = nonempty.iter().map(|n| n + 1).collect();
        assert_eq!(solver.state().counters, expected);
    }

    #[test]
    fn planar_projection_keeps_altitude() {
        let region = BarrierRegion::planar(Vector3::new(0.0, 0.0, 5.0), 3.0, 2.0, Vector3::ZERO).unwrap();
        let config = LloydConfig { seed: 3, ..LloydConfig::new(4) };
        let init = vec![
            Vector3::new(0.1, 0.1, 0.0),
            Vector3::new(0.2, 0.9, 0.0),
            Vector3::new(0.8, 0.3, 0.0),
            Vector3::new(9.0, 9.0, 9.0),
        ];
        let mut rng = stream_rng(3, 0);
        let out = LloydSolver::new(&region, &DensityField::Uniform, &config, init)
            .unwrap()
            .run(&mut rng)
            .unwrap();
        assert!(out.points.iter().all(|p| p.z == 5.0 && region.contains(*p)));
    }

    #[test]
    fn lloyd_is_deterministic() {
        let region = unit_square();
        let config = LloydConfig { seed: 42, ..LloydConfig::new(5) };
        let a = lloyd_run(&region, &DensityField::Uniform, &config).unwrap();
        let b = lloyd_run(&region, &DensityField::Uniform, &config).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn coverage_cost_examples() {
        let mut rng = stream_rng(21, 0);
        let eval = sample_region(&unit_square(), &DensityField::Uniform, 100_000, &mut rng).unwrap();
        let center = [Vector3::new(0.5, 0.5, 0.0)];
        assert!((coverage_cost(&center, &eval) - 1.0 / 6.0).abs() < 0.005);
        let few = &eval[..50];
        assert_eq!(coverage_cost(few, few), 0.0);
        let gens = [Vector3::new(0.2, 0.2, 0.0), Vector3::new(0.7, 0.6, 0.0)];
        let dup = [gens[0], gens[1], gens[1]];
        assert!(coverage_cost(&dup, &eval) <= coverage_cost(&gens, &eval));
    }

    #[test]
    fn gradient_examples() {
        let p = Vector3::new(1.0, 1.0, 0.0);
        let at_centroid = VoronoiCellStats { count: 7, centroid: Some(p) };
        let offset = VoronoiCellStats {
            count: 10,
            centroid: Some(p + Vector3::X),
        };
        let empty = VoronoiCellStats { count: 0, centroid: None };
        let g = cvt_gradient(&[p, p, p], &[at_centroid, offset, empty]);
        assert_eq!(g, vec![Vector3::ZERO, Vector3::new(10.0, 0.0, 0.0), Vector3::ZERO]);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn update_stays_in_hull(
                a1 in 0.0..1.0f64, b1 in 0.0..1.0f64, j in 1u64..500,
                x in prop::array::uniform3(-5.0..5.0f64), u in prop::array::uniform3(-5.0..5.0f64),
            ) {
                let config = LloydConfig { alpha1: a1, alpha2: 1.0 - a1, beta1: b1, beta2: 1.0 - b1, ..LloydConfig::new(1) };
                prop_assume!(config.alpha2 > 0.0 && config.beta2 > 0.0);
                let (x, u) = (Vector3::from(x), Vector3::from(u));
                let (y, _) = lloyd_point_update(x, u, j, &config);
                // y = x + t·(u − x) with t in [0, 1]
                let d = u - x;
                let len2 = d.norm_squared();
                prop_assume!(len2 > 1e-9);
                let t = (y - x).dot(d) / len2;
                prop_assert!((-1e-12..=1.0 + 1e-12).contains(&t));
                prop_assert!((x + d * t - y).norm() < 1e-9);
            }

            #[test]
            fn assignment_picks_a_nearest_generator(
                gens in prop::collection::vec(prop::array::uniform3(-3.0..3.0f64), 1..6),
                q in prop::array::uniform3(-3.0..3.0f64),
            ) {
                let gens: Vec<Vector3> = gens.into_iter().map(Vector3::from).collect();
                let q = Vector3::from(q);
                let k = nearest_generator(q, &gens);
                let dk = q.distance_squared(gens[k]);
                for (i, g) in gens.iter().enumerate() {
                    let d = q.distance_squared(*g);
                    prop_assert!(dk <= d);
                    if i < k { prop_assert!(d > dk); }
                }
            }
        }
    }
}
