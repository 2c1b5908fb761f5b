//! Iterative localization from the body surface inward.
//!
//! Iteration 1 localizes every node closer to the boundary than the
//! communication range. Every later iteration localizes the still-unknown
//! nodes that have at least three already-localized nodes within range;
//! those nodes act as virtual anchors.
//!
//! Two engines share that schedule:
//!
//! * [`Mode::Approximate`] draws each estimate as `truth + N(0, nσ²)` per axis
//!   for a node first localized at iteration `n`.
//! * [`Mode::Full`] measures noisy two-way ToF ranges to boundary anchors
//!   (iteration 1) or to the *estimated* positions of the nearest localized
//!   neighbors (later iterations) and solves the fix by Gauss-Newton, so
//!   errors compound through the anchor chain on their own.
//!
//! Neighbor feasibility always uses true positions: whether two nodes can
//! hear each other is physical, not estimated.

use std::fmt;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

use crate::channel::{measure_range, RangingModel};
use crate::config::ScenarioConfig;
use crate::geometry::{self, NodeId, NodeSet, Point, Region};
use crate::grid::{CellGrid, PointBuckets};
use crate::mac;

/// Localized neighbors required before a node can be localized.
pub const MIN_ANCHORS: usize = 3;

const GN_MAX_ITERATIONS: usize = 50;
const GN_STEP_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LocalizationError {
    #[error("need at least {need} anchors, got {have}")]
    TooFewAnchors { need: usize, have: usize },
    #[error("anchors are collinear (singular value ratio {ratio:e})")]
    DegenerateGeometry { ratio: f64 },
    #[error("operation requires {expected} mode")]
    WrongMode { expected: Mode },
    #[error("invalid localization parameter: {0}")]
    InvalidParameter(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Approximate,
    Full,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::Approximate => f.write_str("approximate"),
            Mode::Full => f.write_str("full"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocationEstimate {
    pub node_id: NodeId,
    pub position: Point,
    /// Iteration in which the node was first localized (≥ 1).
    pub iteration: u32,
    /// Per-axis error variance, mm².
    pub error_variance: f64,
    pub mode: Mode,
}

/// Per-iteration summary of the newly localized cohort.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationStats {
    pub iteration: u32,
    pub newly_localized: usize,
    pub cumulative_coverage: f64,
    /// Mean Euclidean error of the cohort, mm.
    pub mean_error: f64,
    /// Root-mean-square Euclidean error of the cohort, mm.
    pub rmse: f64,
}

/// Compounded per-axis variance after `n` iterations of `σ` accuracy.
pub fn error_variance(n: u32, sigma: f64) -> f64 {
    n as f64 * sigma * sigma
}

// ---------------------------------------------------------------------------
// Trilateration
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrilaterationFix {
    pub position: Point,
    /// `sqrt(Σ (|p − aᵢ| − rᵢ)²)` at the returned position.
    pub residual_norm: f64,
    pub iterations: usize,
    /// False when the step tolerance was not reached within the iteration cap;
    /// the position is then the best iterate seen.
    pub converged: bool,
}

/// Range residuals `|p − aᵢ| − rᵢ` and their Jacobian rows `∂/∂(x, y)`.
///
/// At a point coinciding with an anchor the Jacobian row is zero.
pub fn range_residuals(p: Point, observations: &[(Point, f64)]) -> (Vec<f64>, Vec<[f64; 2]>) {
    let mut residuals = Vec::with_capacity(observations.len());
    let mut jacobian = Vec::with_capacity(observations.len());
    for &(a, r) in observations {
        let v = p - a;
        let d = v.norm();
        residuals.push(d - r);
        if d > 0.0 {
            jacobian.push([v.x / d, v.y / d]);
        } else {
            jacobian.push([0.0, 0.0]);
        }
    }
    (residuals, jacobian)
}

fn cost(p: Point, observations: &[(Point, f64)]) -> f64 {
    observations
        .iter()
        .map(|&(a, r)| {
            let e = p.distance(a) - r;
            e * e
        })
        .sum()
}

/// Ratio of the smallest to the largest singular value of the centered
/// anchor matrix.
pub fn anchor_spread_ratio(anchors: &[Point]) -> f64 {
    let n = anchors.len() as f64;
    let c = anchors.iter().fold(Point::ORIGIN, |acc, &a| acc + a) * (1.0 / n);
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for &a in anchors {
        let d = a - c;
        sxx += d.x * d.x;
        sxy += d.x * d.y;
        syy += d.y * d.y;
    }
    let half_trace = 0.5 * (sxx + syy);
    let disc = (0.25 * (sxx - syy).powi(2) + sxy * sxy).sqrt();
    let l1 = half_trace + disc;
    if l1 <= 0.0 {
        return 0.0;
    }
    let l2 = ((sxx * syy - sxy * sxy) / l1).max(0.0);
    (l2 / l1).sqrt()
}

fn check_geometry(observations: &[(Point, f64)]) -> Result<(), LocalizationError> {
    if observations.len() < MIN_ANCHORS {
        return Err(LocalizationError::TooFewAnchors {
            need: MIN_ANCHORS,
            have: observations.len(),
        });
    }
    let anchors: Vec<Point> = observations.iter().map(|o| o.0).collect();
    let ratio = anchor_spread_ratio(&anchors);
    if !(ratio > 1e-9) {
        return Err(LocalizationError::DegenerateGeometry { ratio });
    }
    Ok(())
}

/// Closed-form fit of the range equations after subtracting their mean,
/// which removes the quadratic term. Exact for noiseless ranges.
pub fn linearized_fix(observations: &[(Point, f64)]) -> Option<Point> {
    let n = observations.len() as f64;
    let mean_a = observations.iter().fold(Point::ORIGIN, |acc, o| acc + o.0) * (1.0 / n);
    let mean_c = observations
        .iter()
        .map(|(a, r)| a.norm_sq() - r * r)
        .sum::<f64>()
        / n;
    // rows 2(aᵢ − ā)·p = |aᵢ|² − rᵢ² − mean
    let (mut m11, mut m12, mut m22, mut b1, mut b2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (a, r) in observations {
        let g = (*a - mean_a) * 2.0;
        let rhs = a.norm_sq() - r * r - mean_c;
        m11 += g.x * g.x;
        m12 += g.x * g.y;
        m22 += g.y * g.y;
        b1 += g.x * rhs;
        b2 += g.y * rhs;
    }
    let det = m11 * m22 - m12 * m12;
    if !(det.abs() > 1e-300) {
        return None;
    }
    let p = Point::new((m22 * b1 - m12 * b2) / det, (m11 * b2 - m12 * b1) / det);
    (p.x.is_finite() && p.y.is_finite()).then_some(p)
}

/// Least-squares position from range measurements to ≥ 3 anchors.
///
/// Minimizes `Σ (|p − aᵢ| − rᵢ)²` by Gauss-Newton, halving any step that
/// increases the cost. Stops when the step norm drops below 1e-9 mm or after
/// 50 iterations. A second descent starts from [`linearized_fix`], and the
/// lower-cost result is returned, so a poor initial guess cannot strand the
/// solver in a local minimum when the ranges are consistent.
pub fn trilaterate(
    observations: &[(Point, f64)],
    initial_guess: Point,
) -> Result<TrilaterationFix, LocalizationError> {
    check_geometry(observations)?;
    let from_guess = gauss_newton(observations, initial_guess);
    Ok(match linearized_fix(observations) {
        Some(start) => {
            let from_linear = gauss_newton(observations, start);
            if from_linear.residual_norm < from_guess.residual_norm {
                from_linear
            } else {
                from_guess
            }
        }
        None => from_guess,
    })
}

fn gauss_newton(observations: &[(Point, f64)], initial_guess: Point) -> TrilaterationFix {
    let mut p = initial_guess;
    let mut current = cost(p, observations);
    let mut best = (p, current);
    let mut converged = false;
    let mut iterations = 0;
    while iterations < GN_MAX_ITERATIONS {
        iterations += 1;
        let (res, jac) = range_residuals(p, observations);
        let (mut a11, mut a12, mut a22, mut g1, mut g2) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for (r, j) in res.iter().zip(&jac) {
            a11 += j[0] * j[0];
            a12 += j[0] * j[1];
            a22 += j[1] * j[1];
            g1 += j[0] * r;
            g2 += j[1] * r;
        }
        let det = a11 * a22 - a12 * a12;
        if !(det.abs() > 1e-300) {
            // singular normal equations: nudge off the stationary point
            p = p + Point::new(1e-6, 1e-6);
            current = cost(p, observations);
            continue;
        }
        let step = Point::new(-(a22 * g1 - a12 * g2) / det, -(a11 * g2 - a12 * g1) / det);
        let mut scale = 1.0;
        let mut next = p + step;
        let mut next_cost = cost(next, observations);
        while next_cost > current && scale > 1e-12 {
            scale *= 0.5;
            next = p + step * scale;
            next_cost = cost(next, observations);
        }
        if next_cost > current {
            // no descent left at floating-point resolution
            converged = true;
            break;
        }
        p = next;
        current = next_cost;
        if current < best.1 {
            best = (p, current);
        }
        if (step * scale).norm() < GN_STEP_TOLERANCE {
            converged = true;
            break;
        }
    }
    TrilaterationFix {
        position: best.0,
        residual_norm: best.1.sqrt(),
        iterations,
        converged,
    }
}

/// Multi-start fix that resolves the near-mirror ambiguity of one-sided
/// anchor layouts: candidates outside the body are dropped, and among
/// candidates whose residuals agree within the noise level the deepest one
/// wins (the region outward has already been covered).
fn constrained_fix(
    observations: &[(Point, f64)],
    region: Region,
    noise_tolerance: f64,
) -> Result<TrilaterationFix, LocalizationError> {
    let n = observations.len() as f64;
    let centroid = observations.iter().fold(Point::ORIGIN, |acc, o| acc + o.0) * (1.0 / n);
    let mean_range = observations.iter().map(|o| o.1).sum::<f64>() / n;
    let inward = if centroid.norm() > 1e-12 {
        centroid * (-1.0 / centroid.norm())
    } else {
        Point::new(1.0, 0.0)
    };
    let shift = 0.5 * mean_range.max(1e-3);
    check_geometry(observations)?;
    let mut starts = vec![centroid, centroid + inward * shift, centroid - inward * shift];
    starts.extend(linearized_fix(observations));
    let fixes: Vec<TrilaterationFix> =
        starts.into_iter().map(|s| gauss_newton(observations, s)).collect();
    let positions: Vec<Point> = fixes.iter().map(|f| f.position).collect();
    let kept = mac::constraint_filter(&positions, region, &[]);
    let mut pool: Vec<TrilaterationFix> = fixes
        .iter()
        .copied()
        .filter(|f| kept.contains(&f.position))
        .collect();
    if pool.is_empty() {
        pool = fixes;
    }
    let best_residual = pool
        .iter()
        .map(|f| f.residual_norm)
        .fold(f64::INFINITY, f64::min);
    let tol = best_residual + noise_tolerance.max(1e-9);
    let chosen = pool
        .into_iter()
        .filter(|f| f.residual_norm <= tol)
        .min_by(|a, b| a.position.norm().total_cmp(&b.position.norm()))
        .expect("pool holds the best-residual fix");
    Ok(chosen)
}

// ---------------------------------------------------------------------------
// Iterative engine
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct FullModeConfig {
    /// Surface anchors with known positions.
    pub anchors: Vec<Point>,
    /// Anchors (or virtual anchors) used per fix; at least 3.
    pub anchors_per_fix: usize,
    pub ranging: RangingModel,
}

#[derive(Debug, Clone)]
pub struct LocalizationState {
    node_set: NodeSet,
    estimates: Vec<Option<LocationEstimate>>,
    sigma: f64,
    comm_range: f64,
    current_iteration: u32,
    full: Option<FullModeConfig>,
    localized_count: usize,
    /// True positions of localized nodes, for feasibility tests.
    localized: PointBuckets,
    /// Unlocalized node ids per cell.
    pending: Vec<Vec<u32>>,
    /// Cells that gained localized nodes in the last iteration.
    dirty: Vec<usize>,
    /// Nodes whose fix failed on degenerate geometry, retried next iteration.
    deferred: Vec<u32>,
    cell_stamp: Vec<u32>,
}

impl LocalizationState {
    pub fn new_approximate(
        node_set: NodeSet,
        sigma: f64,
        comm_range: f64,
    ) -> Result<Self, LocalizationError> {
        if !(sigma.is_finite() && sigma >= 0.0) {
            return Err(LocalizationError::InvalidParameter(format!(
                "sigma must be non-negative, got {sigma}"
            )));
        }
        Self::build(node_set, sigma, comm_range, None)
    }

    pub fn new_full(
        node_set: NodeSet,
        comm_range: f64,
        config: FullModeConfig,
    ) -> Result<Self, LocalizationError> {
        if config.anchors.len() < MIN_ANCHORS {
            return Err(LocalizationError::TooFewAnchors {
                need: MIN_ANCHORS,
                have: config.anchors.len(),
            });
        }
        if config.anchors_per_fix < MIN_ANCHORS {
            return Err(LocalizationError::InvalidParameter(format!(
                "anchors_per_fix must be at least {MIN_ANCHORS}, got {}",
                config.anchors_per_fix
            )));
        }
        if !(config.ranging.sigma_r.is_finite() && config.ranging.sigma_r >= 0.0) {
            return Err(LocalizationError::InvalidParameter(
                "sigma_r must be non-negative".into(),
            ));
        }
        let sigma = config.ranging.sigma_r;
        Self::build(node_set, sigma, comm_range, Some(config))
    }

    fn build(
        node_set: NodeSet,
        sigma: f64,
        comm_range: f64,
        full: Option<FullModeConfig>,
    ) -> Result<Self, LocalizationError> {
        if !(comm_range.is_finite() && comm_range >= 0.0) {
            return Err(LocalizationError::InvalidParameter(format!(
                "comm_range must be non-negative, got {comm_range}"
            )));
        }
        let radius = node_set.region().radius();
        let grid = CellGrid::new(radius, comm_range / 3.0);
        let mut pending = vec![Vec::new(); grid.len()];
        for n in node_set.nodes() {
            pending[grid.index_of(n.position)].push(n.id.0);
        }
        let cells = grid.len();
        Ok(Self {
            estimates: vec![None; node_set.len()],
            node_set,
            sigma,
            comm_range,
            current_iteration: 0,
            full,
            localized_count: 0,
            localized: PointBuckets::new(grid),
            pending,
            dirty: Vec::new(),
            deferred: Vec::new(),
            cell_stamp: vec![0; cells],
        })
    }

    pub fn mode(&self) -> Mode {
        if self.full.is_some() {
            Mode::Full
        } else {
            Mode::Approximate
        }
    }

    pub fn node_set(&self) -> &NodeSet {
        &self.node_set
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn comm_range(&self) -> f64 {
        self.comm_range
    }

    pub fn current_iteration(&self) -> u32 {
        self.current_iteration
    }

    pub fn localized_count(&self) -> usize {
        self.localized_count
    }

    pub fn coverage(&self) -> f64 {
        if self.node_set.is_empty() {
            1.0
        } else {
            self.localized_count as f64 / self.node_set.len() as f64
        }
    }

    pub fn estimate(&self, id: NodeId) -> Option<&LocationEstimate> {
        self.estimates.get(id.0 as usize).and_then(Option::as_ref)
    }

    /// All estimates in node-id order.
    pub fn estimates(&self) -> impl Iterator<Item = &LocationEstimate> + '_ {
        self.estimates.iter().filter_map(Option::as_ref)
    }

    pub fn is_complete(&self) -> bool {
        self.localized_count == self.node_set.len()
    }

    /// Runs one synchronous localization round in whichever mode the state was built for.
    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> IterationStats {
        let iteration = self.current_iteration + 1;
        let mut qualifiers = self.qualifiers(iteration);
        qualifiers.sort_unstable();
        qualifiers.dedup();

        let mut cohort: Vec<LocationEstimate> = Vec::with_capacity(qualifiers.len());
        let mut deferred = Vec::new();
        match self.full.clone() {
            None => {
                let spread = error_variance(iteration, self.sigma).sqrt();
                for &id in &qualifiers {
                    let truth = self.node_set.nodes()[id as usize].position;
                    let dx: f64 = StandardNormal.sample(rng);
                    let dy: f64 = StandardNormal.sample(rng);
                    cohort.push(LocationEstimate {
                        node_id: NodeId(id),
                        position: truth + Point::new(dx, dy) * spread,
                        iteration,
                        error_variance: error_variance(iteration, self.sigma),
                        mode: Mode::Approximate,
                    });
                }
            }
            Some(cfg) => {
                for &id in &qualifiers {
                    match self.full_fix(id, iteration, &cfg, rng) {
                        Ok(est) => cohort.push(est),
                        Err(_) => deferred.push(id),
                    }
                }
            }
        }

        self.current_iteration = iteration;
        self.commit(&cohort);
        self.deferred = deferred;

        let (mut sum, mut sum_sq) = (0.0, 0.0);
        for e in &cohort {
            let err = e.position.distance(self.node_set.nodes()[e.node_id.0 as usize].position);
            sum += err;
            sum_sq += err * err;
        }
        let k = cohort.len();
        IterationStats {
            iteration,
            newly_localized: k,
            cumulative_coverage: self.coverage(),
            mean_error: if k > 0 { sum / k as f64 } else { 0.0 },
            rmse: if k > 0 { (sum_sq / k as f64).sqrt() } else { 0.0 },
        }
    }

    /// Iterates until a round localizes nothing or every node is localized.
    ///
    /// The returned trace holds only rounds that localized at least one node.
    pub fn run_to_completion<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Vec<IterationStats> {
        let mut trace = Vec::new();
        while !self.is_complete() {
            let stats = self.step(rng);
            if stats.newly_localized == 0 {
                break;
            }
            trace.push(stats);
        }
        trace
    }

    fn qualifiers(&mut self, iteration: u32) -> Vec<u32> {
        let range = self.comm_range;
        if range <= 0.0 {
            return Vec::new();
        }
        let region = self.node_set.region();
        let nodes = self.node_set.nodes();
        if iteration == 1 {
            return nodes
                .iter()
                .filter(|n| {
                    geometry::distance_to_boundary(n.position, region)
                        .map(|d| d < range)
                        .unwrap_or(false)
                })
                .map(|n| n.id.0)
                .collect();
        }

        let grid = *self.localized.grid();
        let reach = (range / grid.cell_size()).ceil() as usize;
        let dim = grid.dim();
        let mut candidate_cells = Vec::new();
        for &cell in &self.dirty {
            let (cx, cy) = (cell % dim, cell / dim);
            for y in cy.saturating_sub(reach)..=(cy + reach).min(dim - 1) {
                for x in cx.saturating_sub(reach)..=(cx + reach).min(dim - 1) {
                    let idx = grid.index(x, y);
                    if self.cell_stamp[idx] != iteration {
                        self.cell_stamp[idx] = iteration;
                        candidate_cells.push(idx);
                    }
                }
            }
        }
        let mut out = Vec::new();
        for idx in candidate_cells {
            for &id in &self.pending[idx] {
                let p = nodes[id as usize].position;
                if self.localized.has_at_least(p, range, MIN_ANCHORS) {
                    out.push(id);
                }
            }
        }
        for &id in &self.deferred {
            let p = nodes[id as usize].position;
            if self.localized.has_at_least(p, range, MIN_ANCHORS) {
                out.push(id);
            }
        }
        out
    }

    fn full_fix<R: Rng + ?Sized>(
        &self,
        id: u32,
        iteration: u32,
        cfg: &FullModeConfig,
        rng: &mut R,
    ) -> Result<LocationEstimate, LocalizationError> {
        let truth = self.node_set.nodes()[id as usize].position;
        let k = cfg.anchors_per_fix;
        // (estimated anchor position, true distance, anchor variance)
        let mut refs: Vec<(Point, f64, f64)> = if iteration == 1 {
            let mut a: Vec<(Point, f64, f64)> = cfg
                .anchors
                .iter()
                .map(|&a| (a, a.distance(truth), 0.0))
                .collect();
            a.sort_by(|x, y| x.1.total_cmp(&y.1));
            a.truncate(k);
            a
        } else {
            let mut near = self.localized.within(truth, self.comm_range);
            near.sort_by(|x, y| x.2.total_cmp(&y.2).then(x.0.cmp(&y.0)));
            near.truncate(k);
            near.into_iter()
                .map(|(nid, _, d_sq)| {
                    let est = self.estimates[nid as usize].expect("localized node has an estimate");
                    (est.position, d_sq.sqrt(), est.error_variance)
                })
                .collect()
        };
        if refs.len() < MIN_ANCHORS {
            return Err(LocalizationError::TooFewAnchors {
                need: MIN_ANCHORS,
                have: refs.len(),
            });
        }
        let observations: Vec<(Point, f64)> = refs
            .iter_mut()
            .map(|(a, d, _)| (*a, measure_range(*d, &cfg.ranging, rng)))
            .collect();
        let fix = constrained_fix(&observations, self.node_set.region(), 3.0 * cfg.ranging.sigma_r)?;
        let dof = (observations.len() - 2) as f64;
        let inherited = refs.iter().map(|r| r.2).sum::<f64>() / refs.len() as f64;
        Ok(LocationEstimate {
            node_id: NodeId(id),
            position: fix.position,
            iteration,
            error_variance: fix.residual_norm * fix.residual_norm / dof + inherited,
            mode: Mode::Full,
        })
    }

    fn commit(&mut self, cohort: &[LocationEstimate]) {
        let mut touched = Vec::new();
        for est in cohort {
            let id = est.node_id.0;
            let truth = self.node_set.nodes()[id as usize].position;
            self.estimates[id as usize] = Some(*est);
            touched.push(self.localized.insert(id, truth));
        }
        self.localized_count += cohort.len();
        touched.sort_unstable();
        touched.dedup();
        for cell in &touched {
            let estimates = &self.estimates;
            self.pending[*cell].retain(|&id| estimates[id as usize].is_none());
        }
        self.dirty = touched;
    }
}

pub fn run_iteration_approx<R: Rng + ?Sized>(
    state: &mut LocalizationState,
    rng: &mut R,
) -> Result<IterationStats, LocalizationError> {
    if state.mode() != Mode::Approximate {
        return Err(LocalizationError::WrongMode {
            expected: Mode::Approximate,
        });
    }
    Ok(state.step(rng))
}

pub fn run_iteration_full<R: Rng + ?Sized>(
    state: &mut LocalizationState,
    rng: &mut R,
) -> Result<IterationStats, LocalizationError> {
    if state.mode() != Mode::Full {
        return Err(LocalizationError::WrongMode { expected: Mode::Full });
    }
    Ok(state.step(rng))
}

/// Builds the scenario's node set and runs localization to completion.
pub fn localize_scenario<R: Rng + ?Sized>(
    config: &ScenarioConfig,
    rng: &mut R,
) -> Result<(LocalizationState, Vec<IterationStats>), LocalizationError> {
    let region = config
        .region()
        .map_err(|e| LocalizationError::InvalidParameter(e.to_string()))?;
    let nodes = geometry::place_nodes(region, config.density_per_cm3, rng)
        .map_err(|e| LocalizationError::InvalidParameter(e.to_string()))?;
    let range = config.comm_range_mm();
    let mut state = match config.mode {
        Mode::Approximate => LocalizationState::new_approximate(nodes, config.sigma_mm, range)?,
        Mode::Full => LocalizationState::new_full(
            nodes,
            range,
            FullModeConfig {
                anchors: region.boundary_anchors(config.anchor_count),
                anchors_per_fix: config.anchors_per_fix,
                ranging: config.ranging(),
            },
        )?,
    };
    let trace = state.run_to_completion(rng);
    Ok((state, trace))
}

pub fn run_localization<R: Rng + ?Sized>(
    config: &ScenarioConfig,
    rng: &mut R,
) -> Result<Vec<IterationStats>, LocalizationError> {
    localize_scenario(config, rng).map(|(_, trace)| trace)
}
