//! Location-aware route selection toward the body surface and the
//! directional wake-up plan that rouses only the chosen relays.
//!
//! Link quality is predicted from estimated positions: the estimated
//! distance is inflated by `k_sigma` combined standard deviations of the two
//! estimates before the path loss is evaluated, and nearly depleted nodes
//! take a flat penalty.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};
use std::fmt;

use rayon::prelude::*;
use thiserror::Error;

use crate::channel::{self, ChannelParams};
use crate::geometry::{awoken_by, BeamSector, GeometryError, NodeId, Point, Region};
use crate::grid::{CellGrid, PointBuckets};
use crate::localization::LocationEstimate;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RoutingError {
    #[error("no route from {src} to {dst}")]
    NoRoute { src: VertexId, dst: VertexId },
    #[error("no route from {src} to any surface anchor")]
    NoSurfaceRoute { src: VertexId },
    #[error("vertex {0} is not in the graph")]
    UnknownVertex(VertexId),
    #[error("node {0} has no location estimate")]
    MissingEstimate(NodeId),
    #[error("cannot wake node {target} alone: {others} other node(s) inside the narrowest beams")]
    Ambiguous { target: NodeId, others: usize },
    #[error("invalid routing parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum VertexId {
    Node(NodeId),
    Anchor(u32),
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VertexId::Node(n) => write!(f, "node {n}"),
            VertexId::Anchor(a) => write!(f, "anchor {a}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RouteVertex {
    pub id: VertexId,
    pub position: Point,
    /// Per-axis position variance, mm².
    pub variance: f64,
    /// Estimated stored energy, pJ.
    pub energy: f64,
}

impl RouteVertex {
    pub fn from_estimate(est: &LocationEstimate, energy: f64) -> Self {
        Self {
            id: VertexId::Node(est.node_id),
            position: est.position,
            variance: est.error_variance,
            energy,
        }
    }

    /// Surface anchors have exact positions and mains-like energy.
    pub fn anchor(index: u32, position: Point) -> Self {
        Self {
            id: VertexId::Anchor(index),
            position,
            variance: 0.0,
            energy: f64::INFINITY,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoutingParams {
    pub k_sigma: f64,
    /// mm
    pub d_floor: f64,
    pub snr_threshold_db: f64,
    /// pJ
    pub low_energy_threshold: f64,
    pub energy_penalty_db: f64,
}

impl Default for RoutingParams {
    fn default() -> Self {
        Self {
            k_sigma: 2.0,
            d_floor: 0.1,
            snr_threshold_db: 0.0,
            low_energy_threshold: 5.0,
            energy_penalty_db: 10.0,
        }
    }
}

impl RoutingParams {
    pub fn validate(&self) -> Result<(), RoutingError> {
        let mut bad = Vec::new();
        if !(self.k_sigma.is_finite() && self.k_sigma >= 0.0) {
            bad.push("k_sigma must be non-negative");
        }
        if !(self.d_floor.is_finite() && self.d_floor > 0.0) {
            bad.push("d_floor must be positive");
        }
        if self.snr_threshold_db.is_nan() {
            bad.push("snr_threshold_db must not be NaN");
        }
        if !(self.energy_penalty_db.is_finite() && self.energy_penalty_db >= 0.0) {
            bad.push("energy_penalty_db must be non-negative");
        }
        if self.low_energy_threshold.is_nan() {
            bad.push("low_energy_threshold must not be NaN");
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(RoutingError::InvalidParameter(bad.join("; ")))
        }
    }
}

/// Predicted link quality, with each contribution reported separately.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkMetric {
    /// `distance_term − location_penalty − energy_penalty`, dB.
    pub expected_snr_db: f64,
    /// Budget minus path loss at the (floored) estimated distance.
    pub distance_term_db: f64,
    /// Extra loss from inflating the distance by the location uncertainty.
    pub location_penalty_db: f64,
    pub energy_penalty_db: f64,
    /// Inflated distance the loss was evaluated at, mm.
    pub effective_distance: f64,
}

pub fn vertex_link_metric(
    a: &RouteVertex,
    b: &RouteVertex,
    channel: &ChannelParams,
    params: &RoutingParams,
) -> LinkMetric {
    let d = a.position.distance(b.position).max(params.d_floor);
    let d_eff = d + params.k_sigma * (a.variance + b.variance).max(0.0).sqrt();
    let loss_est = channel::path_loss_unchecked(d, channel);
    let loss_eff = channel::path_loss_unchecked(d_eff, channel);
    let energy_penalty_db = if a.energy.min(b.energy) < params.low_energy_threshold {
        params.energy_penalty_db
    } else {
        0.0
    };
    let distance_term_db = channel.link_budget_db - loss_est;
    let location_penalty_db = loss_eff - loss_est;
    LinkMetric {
        expected_snr_db: channel.link_budget_db - loss_eff - energy_penalty_db,
        distance_term_db,
        location_penalty_db,
        energy_penalty_db,
        effective_distance: d_eff,
    }
}

pub fn link_metric(
    a: &LocationEstimate,
    b: &LocationEstimate,
    energies: (f64, f64),
    channel: &ChannelParams,
    params: &RoutingParams,
) -> LinkMetric {
    vertex_link_metric(
        &RouteVertex::from_estimate(a, energies.0),
        &RouteVertex::from_estimate(b, energies.1),
        channel,
        params,
    )
}

/// Best metric any link can reach: exact co-located endpoints at `d_floor`.
pub fn max_expected_snr(channel: &ChannelParams, params: &RoutingParams) -> f64 {
    channel.link_budget_db - channel::path_loss_unchecked(params.d_floor, channel)
}

#[derive(Debug, Clone)]
pub struct WakeGraph {
    vertices: Vec<RouteVertex>,
    index: HashMap<VertexId, usize>,
    /// Neighbors sorted by vertex id.
    adjacency: Vec<Vec<(usize, LinkMetric)>>,
    snr_cap_db: f64,
}

impl WakeGraph {
    pub fn vertices(&self) -> &[RouteVertex] {
        &self.vertices
    }

    pub fn vertex(&self, id: VertexId) -> Option<&RouteVertex> {
        self.index.get(&id).map(|&i| &self.vertices[i])
    }

    pub fn contains(&self, id: VertexId) -> bool {
        self.index.contains_key(&id)
    }

    pub fn snr_cap_db(&self) -> f64 {
        self.snr_cap_db
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn neighbors(&self, id: VertexId) -> impl Iterator<Item = (VertexId, &LinkMetric)> + '_ {
        let slot = self.index.get(&id).copied();
        slot.into_iter()
            .flat_map(move |i| self.adjacency[i].iter().map(|(j, m)| (self.vertices[*j].id, m)))
    }

    pub fn edge(&self, a: VertexId, b: VertexId) -> Option<&LinkMetric> {
        let (&i, &j) = (self.index.get(&a)?, self.index.get(&b)?);
        self.adjacency[i]
            .iter()
            .find(|(k, _)| *k == j)
            .map(|(_, m)| m)
    }

    /// Undirected edges `(u, v)` with `u < v`, sorted.
    pub fn edges(&self) -> Vec<(VertexId, VertexId)> {
        let mut out = Vec::new();
        for (i, adj) in self.adjacency.iter().enumerate() {
            for (j, _) in adj {
                let (u, v) = (self.vertices[i].id, self.vertices[*j].id);
                if u < v {
                    out.push((u, v));
                }
            }
        }
        out.sort_unstable();
        out
    }

    pub fn edge_cost(&self, metric: &LinkMetric) -> f64 {
        (self.snr_cap_db - metric.expected_snr_db).max(0.0)
    }
}

/// Vertices for a localized snapshot plus surface anchors (anchor `i` gets `VertexId::Anchor(i)`).
pub fn route_vertices(
    estimates: &[LocationEstimate],
    energies: impl Fn(NodeId) -> f64,
    anchors: &[Point],
) -> Vec<RouteVertex> {
    estimates
        .iter()
        .map(|e| RouteVertex::from_estimate(e, energies(e.node_id)))
        .chain(
            anchors
                .iter()
                .enumerate()
                .map(|(i, &p)| RouteVertex::anchor(i as u32, p)),
        )
        .collect()
}

/// Links every vertex pair whose expected SNR reaches the threshold.
pub fn build_wake_graph(
    vertices: Vec<RouteVertex>,
    channel: &ChannelParams,
    params: &RoutingParams,
) -> Result<WakeGraph, RoutingError> {
    params.validate()?;
    channel
        .validate()
        .map_err(|e| RoutingError::InvalidParameter(e.to_string()))?;
    let mut vertices = vertices;
    vertices.sort_by_key(|v| v.id);
    let mut index = HashMap::with_capacity(vertices.len());
    for (i, v) in vertices.iter().enumerate() {
        if index.insert(v.id, i).is_some() {
            return Err(RoutingError::InvalidParameter(format!("duplicate vertex {}", v.id)));
        }
    }

    let n = vertices.len();
    let threshold = params.snr_threshold_db;
    // path loss is increasing, so a finite threshold bounds the estimated distance
    let reach = if threshold.is_finite() {
        let d_max = channel::max_distance_for_loss(channel.link_budget_db - threshold, channel);
        (d_max >= channel.ref_distance).then_some(d_max)
    } else {
        None
    };

    let adjacency: Vec<Vec<(usize, LinkMetric)>> = match (threshold, reach) {
        (t, _) if t == f64::INFINITY => vec![Vec::new(); n],
        (_, Some(d_max)) if d_max.is_finite() && n > 64 => {
            let extent = vertices
                .iter()
                .map(|v| v.position.x.abs().max(v.position.y.abs()))
                .fold(1.0, f64::max);
            let mut buckets = PointBuckets::new(CellGrid::new(extent, d_max));
            for (i, v) in vertices.iter().enumerate() {
                buckets.insert(i as u32, v.position);
            }
            let radius = d_max * (1.0 + 1e-9) + 1e-9;
            (0..n)
                .into_par_iter()
                .map(|i| {
                    let mut adj: Vec<(usize, LinkMetric)> = buckets
                        .within(vertices[i].position, radius)
                        .into_iter()
                        .map(|(j, _, _)| j as usize)
                        .filter(|&j| j != i)
                        .filter_map(|j| {
                            let m = vertex_link_metric(&vertices[i], &vertices[j], channel, params);
                            (m.expected_snr_db >= threshold).then_some((j, m))
                        })
                        .collect();
                    adj.sort_by_key(|(j, _)| *j);
                    adj
                })
                .collect()
        }
        _ => (0..n)
            .into_par_iter()
            .map(|i| {
                (0..n)
                    .filter(|&j| j != i)
                    .filter_map(|j| {
                        let m = vertex_link_metric(&vertices[i], &vertices[j], channel, params);
                        (m.expected_snr_db >= threshold).then_some((j, m))
                    })
                    .collect()
            })
            .collect(),
    };

    Ok(WakeGraph {
        vertices,
        index,
        adjacency,
        snr_cap_db: max_expected_snr(channel, params),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Route {
    /// Source first, destination last.
    pub hops: Vec<VertexId>,
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq)]
struct Label {
    cost: f64,
    path: Vec<VertexId>,
    vertex: usize,
}

impl Eq for Label {}

impl Ord for Label {
    // reversed so the max-heap yields the cheapest, then lexicographically smallest, path
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .cost
            .total_cmp(&self.cost)
            .then_with(|| other.path.cmp(&self.path))
    }
}

impl PartialOrd for Label {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn better(cost: f64, path: &[VertexId], than: &Option<(f64, Vec<VertexId>)>) -> bool {
    match than {
        None => true,
        Some((c, p)) => cost < *c || (cost == *c && path < p.as_slice()),
    }
}

/// Cheapest paths from `src` to every reachable vertex; equal-cost ties go to
/// the lexicographically smallest vertex-id sequence.
fn shortest_paths(graph: &WakeGraph, src: usize) -> Vec<Option<(f64, Vec<VertexId>)>> {
    let n = graph.vertices.len();
    let mut best: Vec<Option<(f64, Vec<VertexId>)>> = vec![None; n];
    let mut done = vec![false; n];
    let start = vec![graph.vertices[src].id];
    best[src] = Some((0.0, start.clone()));
    let mut heap = BinaryHeap::new();
    heap.push(Label {
        cost: 0.0,
        path: start,
        vertex: src,
    });
    while let Some(Label { cost, path, vertex }) = heap.pop() {
        if done[vertex] {
            continue;
        }
        done[vertex] = true;
        for (next, metric) in &graph.adjacency[vertex] {
            if done[*next] {
                continue;
            }
            let c = cost + graph.edge_cost(metric);
            let mut p = path.clone();
            p.push(graph.vertices[*next].id);
            if better(c, &p, &best[*next]) {
                best[*next] = Some((c, p.clone()));
                heap.push(Label {
                    cost: c,
                    path: p,
                    vertex: *next,
                });
            }
        }
    }
    best
}

/// Dijkstra over edge costs `snr_cap − expected_snr_db`.
pub fn select_route(graph: &WakeGraph, src: VertexId, dst: VertexId) -> Result<Route, RoutingError> {
    let s = *graph.index.get(&src).ok_or(RoutingError::UnknownVertex(src))?;
    let d = *graph.index.get(&dst).ok_or(RoutingError::UnknownVertex(dst))?;
    match shortest_paths(graph, s).swap_remove(d) {
        Some((cost, hops)) => Ok(Route { hops, cost }),
        None => Err(RoutingError::NoRoute { src, dst }),
    }
}

/// Cheapest route from `src` to whichever anchor is best reached.
pub fn select_route_to_surface(graph: &WakeGraph, src: VertexId) -> Result<Route, RoutingError> {
    let s = *graph.index.get(&src).ok_or(RoutingError::UnknownVertex(src))?;
    let all = shortest_paths(graph, s);
    graph
        .vertices
        .iter()
        .zip(all)
        .filter(|(v, _)| matches!(v.id, VertexId::Anchor(_)))
        .filter_map(|(_, r)| r)
        .min_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)))
        .map(|(cost, hops)| Route { hops, cost })
        .ok_or(RoutingError::NoSurfaceRoute { src })
}

#[derive(Debug, Clone, PartialEq)]
pub struct HopWakeup {
    pub node: NodeId,
    pub beams: Vec<BeamSector>,
    /// Half width the beams were narrowed to, radians.
    pub half_width: f64,
    /// Re-checked: the beam intersection holds this node and no other estimate.
    pub unique: bool,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct WakePlan {
    pub hops: Vec<HopWakeup>,
}

impl WakePlan {
    pub fn node_ids(&self) -> Vec<NodeId> {
        self.hops.iter().map(|h| h.node).collect()
    }
}

pub const MIN_SUBTENDED_ANGLE: f64 = std::f64::consts::FRAC_PI_3;
pub const DEFAULT_MIN_HALF_WIDTH: f64 = 1.0 * std::f64::consts::PI / 180.0;

/// Two boundary origins that subtend at least 60° at `target`.
fn beam_origins(target: Point, region: Region) -> (Point, Point) {
    let theta = if target.norm() > 1e-12 { target.angle() } else { 0.0 };
    let subtended = |a: Point, b: Point| {
        let (u, v) = (a - target, b - target);
        v.cross(u).abs().atan2(u.dot(v))
    };
    let mut chosen = None;
    for step in 0..=12 {
        let delta = (60.0 + 10.0 * step as f64).to_radians();
        let a = region.boundary_point(theta + delta);
        let b = region.boundary_point(theta - delta);
        if subtended(a, b) >= MIN_SUBTENDED_ANGLE {
            chosen = Some((a, b));
            break;
        }
    }
    chosen.unwrap_or_else(|| {
        (
            region.boundary_point(theta + std::f64::consts::FRAC_PI_2),
            region.boundary_point(theta - std::f64::consts::FRAC_PI_2),
        )
    })
}

/// Wake-up beams for every hop, narrowed by halving from `half_width` down to
/// `min_half_width` until only the hop's own estimate is inside all of them.
pub fn plan_wakeup(
    hops: &[NodeId],
    estimates: &[LocationEstimate],
    region: Region,
    half_width: f64,
    min_half_width: f64,
) -> Result<WakePlan, RoutingError> {
    if !(min_half_width > 0.0 && min_half_width <= half_width) {
        return Err(RoutingError::InvalidParameter(format!(
            "need 0 < min_half_width <= half_width, got {min_half_width} and {half_width}"
        )));
    }
    let by_id: HashMap<NodeId, &LocationEstimate> =
        estimates.iter().map(|e| (e.node_id, e)).collect();
    let mut plan = WakePlan::default();
    for &node in hops {
        let target = by_id
            .get(&node)
            .ok_or(RoutingError::MissingEstimate(node))?
            .position;
        let (oa, ob) = beam_origins(target, region);
        let mut width = half_width;
        loop {
            let beams = vec![
                BeamSector::aimed_at(region, oa, target, width)?,
                BeamSector::aimed_at(region, ob, target, width)?,
            ];
            let mut others = 0usize;
            let mut hit_self = false;
            for e in estimates {
                if awoken_by(e.position, &beams)? {
                    if e.node_id == node {
                        hit_self = true;
                    } else {
                        others += 1;
                    }
                }
            }
            if hit_self && others == 0 {
                plan.hops.push(HopWakeup {
                    node,
                    beams,
                    half_width: width,
                    unique: true,
                });
                break;
            }
            if width <= min_half_width {
                return Err(RoutingError::Ambiguous {
                    target: node,
                    others,
                });
            }
            width = (width * 0.5).max(min_half_width);
        }
    }
    Ok(plan)
}
