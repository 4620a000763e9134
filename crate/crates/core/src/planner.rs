//! Single-source planning: `set_init` computes, for every cutline, the
//! homotopy classes whose optimal paths from `x_init` reach its sample
//! points; `get_goal` then answers any goal by compressing only the classes
//! stored on the cutlines around it.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::sync::{Arc, RwLock};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::dissection::{ConvexDissection, CutlineId, DissectionError, PolygonId};
use crate::encoding::{CdtEncoding, CutlineSymbol, EncodingError};
use crate::geometry::{Point, Polyline};
use crate::shortest_path::{default_eps, get_shortest_path, CompressionResult, ShortestPathError};

/// Default spacing of cutline samples, in map units.
pub const DEFAULT_INTERVAL: f64 = 2.0;

/// Relative factor for the minimum cost improvement that counts as a change
/// when re-evaluating a cutline.
pub const DELTA_COST_FACTOR: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum PlannerError {
    #[error("{0} is not in free space")]
    NotInFreeSpace(Point),
    #[error("sample interval must be positive, got {0}")]
    BadInterval(f64),
    #[error("goal {0} is unreachable from the initial point")]
    Unreachable(Point),
    #[error("snapshot does not match the dissection: {0}")]
    Snapshot(String),
    #[error(transparent)]
    ShortestPath(#[from] ShortestPathError),
    #[error(transparent)]
    Encoding(#[from] EncodingError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl From<DissectionError> for PlannerError {
    fn from(e: DissectionError) -> Self {
        match e {
            DissectionError::NotInFreeSpace(p) => PlannerError::NotInFreeSpace(p),
            other => PlannerError::Snapshot(other.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlannerConfig {
    /// Cutline sample spacing in map units.
    pub interval: f64,
    /// Compression convergence threshold while building the sets; `None`
    /// derives it from the map.
    pub eps: Option<f64>,
    /// Convergence threshold for goal queries; `None` derives it from the
    /// map with [`GOAL_EPS_FACTOR`].
    #[serde(default)]
    pub goal_eps: Option<f64>,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        PlannerConfig { interval: DEFAULT_INTERVAL, eps: None, goal_eps: None }
    }
}

/// Relative factor for the goal-query convergence threshold. Sweeps converge
/// linearly, so stopping on a per-sweep gain of `eps` can leave an error
/// several times `eps`; queries are cheap enough to run much tighter than the
/// sample loop.
pub const GOAL_EPS_FACTOR: f64 = 1e-10;

/// Sample parameters along one cutline, endpoints included.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutlineSamples {
    pub cutline: CutlineId,
    pub interval: f64,
    pub params: Vec<f64>,
    pub points: Vec<Point>,
}

impl CutlineSamples {
    pub fn new(d: &ConvexDissection, cutline: CutlineId, interval: f64) -> Self {
        let cut = d.cutline(cutline);
        let n = ((cut.length() / interval).ceil() as usize).max(1);
        let params: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64).collect();
        let points = params.iter().map(|&t| cut.at(t)).collect();
        CutlineSamples { cutline, interval, params, points }
    }
}

/// Best class for one sample point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    /// Index into [`EncodingSet::distinct`].
    pub class: usize,
    pub cost: f64,
    pub path: Polyline,
}

/// The optimal-encoding set of one cutline.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EncodingSet {
    /// Distinct winning encodings, ascending.
    pub distinct: Vec<CdtEncoding>,
    /// One record per sample of the cutline, or empty when not reached.
    pub records: Vec<SampleRecord>,
}

impl EncodingSet {
    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn encoding_of(&self, r: &SampleRecord) -> &CdtEncoding {
        &self.distinct[r.class]
    }

    fn from_winners(winners: Vec<(CdtEncoding, f64, Polyline)>) -> Self {
        let distinct: Vec<CdtEncoding> =
            winners.iter().map(|w| w.0.clone()).collect::<BTreeSet<_>>().into_iter().collect();
        let records = winners
            .into_iter()
            .map(|(enc, cost, path)| SampleRecord {
                class: distinct.binary_search(&enc).expect("collected above"),
                cost,
                path,
            })
            .collect();
        EncodingSet { distinct, records }
    }

    fn winners(&self) -> Vec<(CdtEncoding, f64, Polyline)> {
        self.records.iter().map(|r| (self.distinct[r.class].clone(), r.cost, r.path.clone())).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Empty,
    Ready,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PlannerStats {
    /// Times a re-evaluated cutline's set changed.
    pub rewire_triggers: usize,
    /// Cutlines popped from the rewiring queue.
    pub rewire_pops: usize,
    /// Full per-cutline set computations.
    pub set_computations: usize,
    pub cold_solves: usize,
    pub cold_sweeps: usize,
    pub warm_solves: usize,
    pub warm_sweeps: usize,
    /// Rewiring stopped by the safety cap (should stay 0).
    pub rewire_capped: usize,
    pub set_init_ms: f64,
}

impl PlannerStats {
    pub fn mean_warm_sweeps(&self) -> f64 {
        if self.warm_solves == 0 {
            0.0
        } else {
            self.warm_sweeps as f64 / self.warm_solves as f64
        }
    }
}

/// Result of a goal query.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GoalResult {
    pub path: Polyline,
    pub cost: f64,
    /// Winning class; `None` for the straight line inside the start polygon.
    #[serde(serialize_with = "encoding_as_str")]
    pub encoding: Option<CdtEncoding>,
    pub candidates: usize,
    /// The goal lies on a cutline, so both incident polygons were searched.
    pub goal_on_cutline: bool,
}

fn encoding_as_str<S: serde::Serializer>(e: &Option<CdtEncoding>, s: S) -> Result<S::Ok, S::Error> {
    match e {
        Some(e) => s.serialize_some(&e.to_string()),
        None => s.serialize_none(),
    }
}

/// Per-cutline encoding sets for one initial point.
#[derive(Debug, Clone)]
pub struct PlannerState {
    pub dissection: Arc<ConvexDissection>,
    pub x_init: Point,
    pub config: PlannerConfig,
    pub eps: f64,
    pub goal_eps: f64,
    pub delta_cost: f64,
    pub samples: Vec<CutlineSamples>,
    pub sets: Vec<EncodingSet>,
    pub status: Status,
    pub stats: PlannerStats,
    init_polygons: Vec<PolygonId>,
}

impl PlannerState {
    /// An empty state bound to a dissection, before any initial point.
    pub fn new(d: Arc<ConvexDissection>, config: PlannerConfig) -> Result<Self, PlannerError> {
        if !(config.interval > 0.0 && config.interval.is_finite()) {
            return Err(PlannerError::BadInterval(config.interval));
        }
        let diag = d.env.diagonal();
        let samples = d.cutlines.iter().map(|c| CutlineSamples::new(&d, c.id, config.interval)).collect();
        let n = d.cutlines.len();
        Ok(PlannerState {
            eps: config.eps.unwrap_or_else(|| default_eps(diag)),
            goal_eps: config.goal_eps.unwrap_or(GOAL_EPS_FACTOR * diag.max(1.0)),
            delta_cost: DELTA_COST_FACTOR * diag.max(1.0),
            x_init: Point::default(),
            config,
            samples,
            sets: vec![EncodingSet::default(); n],
            status: Status::Empty,
            stats: PlannerStats::default(),
            init_polygons: Vec::new(),
            dissection: d,
        })
    }

    pub fn set(&self, c: CutlineId) -> &EncodingSet {
        &self.sets[c.index()]
    }

    /// Cutlines with a nonempty set.
    pub fn reached_count(&self) -> usize {
        self.sets.iter().filter(|s| !s.is_empty()).count()
    }

    /// Hex SHA-256 over the initial point and every stored record.
    pub fn state_hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.x_init.x.to_le_bytes());
        h.update(self.x_init.y.to_le_bytes());
        for (i, s) in self.sets.iter().enumerate() {
            h.update((i as u64).to_le_bytes());
            for e in &s.distinct {
                h.update(e.to_string().as_bytes());
                h.update(b";");
            }
            for r in &s.records {
                h.update((r.class as u64).to_le_bytes());
                h.update(r.cost.to_le_bytes());
                for v in &r.path.vertices {
                    h.update(v.x.to_le_bytes());
                    h.update(v.y.to_le_bytes());
                }
            }
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Runs the breadth-first wave from `x_init`, replacing any previous
    /// result.
    pub fn set_init(&mut self, x_init: Point) -> Result<(), PlannerError> {
        let start = Instant::now();
        let d = Arc::clone(&self.dissection);
        if !x_init.is_finite() {
            return Err(PlannerError::NotInFreeSpace(x_init));
        }
        let init_polygons = d.containing(x_init);
        if init_polygons.is_empty() {
            return Err(PlannerError::NotInFreeSpace(x_init));
        }
        self.x_init = x_init;
        self.init_polygons = init_polygons;
        self.sets = vec![EncodingSet::default(); d.cutlines.len()];
        self.stats = PlannerStats::default();
        self.status = Status::Empty;

        let n = d.cutlines.len();
        let mut explored = vec![false; n];
        let mut queued = vec![false; n];
        let mut add: VecDeque<CutlineId> = VecDeque::new();

        // Cutlines of the start polygon(s) are reached by straight lines.
        let seeds = d.cutlines_adjacent_to_point(x_init)?;
        for &c in &seeds {
            self.sets[c.index()] = self.homotopy_classes_for_cutline(c, &explored)?;
            explored[c.index()] = true;
        }
        for &c in &seeds {
            for nb in d.cutlines_adjacent_to_cutline(c)? {
                if !explored[nb.index()] && !queued[nb.index()] {
                    queued[nb.index()] = true;
                    add.push_back(nb);
                }
            }
        }

        while let Some(c) = add.pop_front() {
            self.sets[c.index()] = self.homotopy_classes_for_cutline(c, &explored)?;
            explored[c.index()] = true;
            for nb in d.cutlines_adjacent_to_cutline(c)? {
                if !explored[nb.index()] && !queued[nb.index()] {
                    queued[nb.index()] = true;
                    add.push_back(nb);
                }
            }
            self.optimize_existing(c, &explored)?;
        }

        self.status = Status::Ready;
        self.stats.set_init_ms = start.elapsed().as_secs_f64() * 1e3;
        log::debug!(
            "set_init from {x_init}: {} of {n} cutlines reached, {} rewire triggers, {:.2} ms",
            self.reached_count(),
            self.stats.rewire_triggers,
            self.stats.set_init_ms
        );
        Ok(())
    }

    /// Candidate classes for reaching `c`: every stored class of an explored
    /// neighbouring cutline, plus the constant walk of the start polygon(s),
    /// each extended across `c`. Walks that would immediately re-cross their
    /// last cutline are skipped.
    fn candidates(&self, c: CutlineId, explored: &[bool]) -> Result<Vec<CdtEncoding>, PlannerError> {
        let d = &self.dissection;
        let mut pool: BTreeSet<CdtEncoding> = BTreeSet::new();
        let mut extend = |f: &CdtEncoding| {
            if f.cutline_sequence().last() == Some(&c) {
                return;
            }
            if let Some(e) = f.concat(d, CutlineSymbol(c)) {
                pool.insert(e);
            }
        };
        for &p in &self.init_polygons {
            extend(&CdtEncoding::single(p));
        }
        for nb in d.cutlines_adjacent_to_cutline(c)? {
            if explored[nb.index()] {
                for f in &self.sets[nb.index()].distinct {
                    extend(f);
                }
            }
        }
        Ok(pool.into_iter().collect())
    }

    /// Evaluates every candidate class at every sample of `c`, warm-starting
    /// each class from its result at the previous sample, and keeps the
    /// cheapest class per sample (ties to the smaller encoding).
    pub fn homotopy_classes_for_cutline(
        &mut self,
        c: CutlineId,
        explored: &[bool],
    ) -> Result<EncodingSet, PlannerError> {
        let cands = self.candidates(c, explored)?;
        self.stats.set_computations += 1;
        if cands.is_empty() {
            return Ok(EncodingSet::default());
        }
        let d = Arc::clone(&self.dissection);
        let samples = &self.samples[c.index()];
        let mut warm: Vec<Option<Vec<Point>>> = vec![None; cands.len()];
        let mut winners = Vec::with_capacity(samples.points.len());
        for &x in &samples.points {
            let mut best: Option<(usize, CompressionResult)> = None;
            for (j, enc) in cands.iter().enumerate() {
                let r = get_shortest_path(&d, enc, self.x_init, x, warm[j].as_deref(), self.eps)?;
                if warm[j].is_some() {
                    self.stats.warm_solves += 1;
                    self.stats.warm_sweeps += r.iterations;
                } else {
                    self.stats.cold_solves += 1;
                    self.stats.cold_sweeps += r.iterations;
                }
                warm[j] = Some(r.path.vertices.clone());
                if best.as_ref().is_none_or(|(_, b)| r.cost < b.cost) {
                    best = Some((j, r));
                }
            }
            let (j, r) = best.expect("at least one candidate");
            winners.push((cands[j].clone(), r.cost, r.path));
        }
        Ok(EncodingSet::from_winners(winners))
    }

    /// Re-evaluates explored cutlines around `c` breadth-first, propagating
    /// outward from every cutline whose set changed. Returns the number of
    /// changes.
    ///
    /// A recomputed sample only replaces the stored one when it is cheaper
    /// by more than `delta_cost`, so every change strictly lowers a cost and
    /// the loop terminates.
    pub fn optimize_existing(&mut self, c: CutlineId, explored: &[bool]) -> Result<usize, PlannerError> {
        let d = Arc::clone(&self.dissection);
        let n = d.cutlines.len();
        let mut queued = vec![false; n];
        let mut queue: VecDeque<CutlineId> = VecDeque::new();
        for nb in d.cutlines_adjacent_to_cutline(c)? {
            if explored[nb.index()] {
                queued[nb.index()] = true;
                queue.push_back(nb);
            }
        }
        let cap = 1000 * n.max(1);
        let mut pops = 0;
        let mut triggers = 0;
        while let Some(r) = queue.pop_front() {
            queued[r.index()] = false;
            pops += 1;
            if pops > cap {
                self.stats.rewire_capped += 1;
                log::warn!("rewiring around cutline {c} stopped after {cap} re-evaluations");
                break;
            }
            let fresh = self.homotopy_classes_for_cutline(r, explored)?;
            let Some(merged) = self.merge_improvements(r, fresh) else {
                continue;
            };
            self.sets[r.index()] = merged;
            triggers += 1;
            for nb in d.cutlines_adjacent_to_cutline(r)? {
                if explored[nb.index()] && !queued[nb.index()] {
                    queued[nb.index()] = true;
                    queue.push_back(nb);
                }
            }
        }
        self.stats.rewire_pops += pops;
        self.stats.rewire_triggers += triggers;
        Ok(triggers)
    }

    /// The stored set of `c` with every sample that `fresh` improves by more
    /// than `delta_cost` replaced, or `None` when nothing improves.
    fn merge_improvements(&self, c: CutlineId, fresh: EncodingSet) -> Option<EncodingSet> {
        let old = &self.sets[c.index()];
        if fresh.is_empty() {
            return None;
        }
        if old.is_empty() {
            return Some(fresh);
        }
        let mut changed = false;
        let mut winners = old.winners();
        for (w, r) in winners.iter_mut().zip(&fresh.records) {
            if r.cost < w.1 - self.delta_cost {
                *w = (fresh.distinct[r.class].clone(), r.cost, r.path.clone());
                changed = true;
            }
        }
        changed.then(|| EncodingSet::from_winners(winners))
    }

    /// Optimal path from `x_init` to `goal`.
    pub fn get_goal(&self, goal: Point) -> Result<GoalResult, PlannerError> {
        let d = &self.dissection;
        if !goal.is_finite() {
            return Err(PlannerError::NotInFreeSpace(goal));
        }
        let goal_polys = d.containing(goal);
        if goal_polys.is_empty() {
            return Err(PlannerError::NotInFreeSpace(goal));
        }
        let goal_on_cutline = goal_polys.len() > 1;
        if goal_polys.iter().any(|p| self.init_polygons.contains(p)) {
            return Ok(GoalResult {
                path: Polyline::new(vec![self.x_init, goal]),
                cost: self.x_init.dist(goal),
                encoding: None,
                candidates: 0,
                goal_on_cutline,
            });
        }

        // Candidate class -> the stored sample path nearest the goal.
        let mut cands: BTreeMap<&CdtEncoding, (f64, &Polyline)> = BTreeMap::new();
        for c in d.cutlines_adjacent_to_point(goal)? {
            let set = &self.sets[c.index()];
            for (r, &x) in set.records.iter().zip(&self.samples[c.index()].points) {
                let enc = set.encoding_of(r);
                if !goal_polys.contains(&enc.last()) {
                    continue;
                }
                let dist = x.dist(goal);
                let e = cands.entry(enc).or_insert((dist, &r.path));
                if dist < e.0 {
                    *e = (dist, &r.path);
                }
            }
        }
        if cands.is_empty() {
            return Err(PlannerError::Unreachable(goal));
        }
        let n = cands.len();
        let mut best: Option<(&CdtEncoding, CompressionResult)> = None;
        for (enc, (_, warm)) in cands {
            let r = get_shortest_path(d, enc, self.x_init, goal, Some(&warm.vertices), self.goal_eps)?;
            // Ascending iteration makes the first of a near-tie the smaller
            // encoding.
            if best.as_ref().is_none_or(|(_, b)| r.cost < b.cost - self.delta_cost) {
                best = Some((enc, r));
            }
        }
        let (enc, r) = best.expect("nonempty candidates");
        Ok(GoalResult { path: r.path, cost: r.cost, encoding: Some(enc.clone()), candidates: n, goal_on_cutline })
    }

    pub fn to_snapshot(&self) -> PlannerSnapshot {
        PlannerSnapshot {
            format: SNAPSHOT_FORMAT.to_string(),
            env_hash: self.dissection.env.content_hash(),
            x_init: self.x_init,
            config: self.config,
            status: self.status,
            stats: self.stats.clone(),
            sets: self
                .sets
                .iter()
                .enumerate()
                .filter(|(_, s)| !s.is_empty())
                .map(|(i, s)| SetSnapshot {
                    cutline: CutlineId(i as u32),
                    distinct: s.distinct.iter().map(|e| e.to_string()).collect(),
                    records: s.records.clone(),
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_snapshot()).expect("state serializes")
    }

    /// Restores a state saved by [`PlannerState::to_snapshot`] against the
    /// same dissection.
    pub fn from_snapshot(d: Arc<ConvexDissection>, snap: PlannerSnapshot) -> Result<Self, PlannerError> {
        if snap.format != SNAPSHOT_FORMAT {
            return Err(PlannerError::Snapshot(format!("unknown format {:?}", snap.format)));
        }
        if snap.env_hash != d.env.content_hash() {
            return Err(PlannerError::Snapshot("environment hash differs".into()));
        }
        let mut st = PlannerState::new(Arc::clone(&d), snap.config)?;
        st.x_init = snap.x_init;
        st.init_polygons = d.containing(snap.x_init);
        st.status = snap.status;
        st.stats = snap.stats;
        for s in snap.sets {
            let i = s.cutline.index();
            if i >= d.cutlines.len() || s.records.len() != st.samples[i].points.len() {
                return Err(PlannerError::Snapshot(format!("bad set for cutline {}", s.cutline)));
            }
            let distinct = s.distinct.iter().map(|e| CdtEncoding::parse(&d, e)).collect::<Result<Vec<_>, _>>()?;
            if s.records.iter().any(|r| r.class >= distinct.len()) {
                return Err(PlannerError::Snapshot(format!("bad class index on cutline {}", s.cutline)));
            }
            st.sets[i] = EncodingSet { distinct, records: s.records };
        }
        Ok(st)
    }

    pub fn from_json(d: Arc<ConvexDissection>, text: &str) -> Result<Self, PlannerError> {
        Self::from_snapshot(d, serde_json::from_str(text)?)
    }
}

const SNAPSHOT_FORMAT: &str = "cdt-planner/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetSnapshot {
    pub cutline: CutlineId,
    pub distinct: Vec<String>,
    pub records: Vec<SampleRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlannerSnapshot {
    pub format: String,
    pub env_hash: String,
    pub x_init: Point,
    pub config: PlannerConfig,
    pub status: Status,
    pub stats: PlannerStats,
    pub sets: Vec<SetSnapshot>,
}

/// Builds a ready state for `x_init`.
pub fn set_init(d: Arc<ConvexDissection>, x_init: Point, config: PlannerConfig) -> Result<PlannerState, PlannerError> {
    let mut st = PlannerState::new(d, config)?;
    st.set_init(x_init)?;
    Ok(st)
}

/// Shares the latest ready state with concurrent readers. `reinit` computes
/// a new state without holding the lock and swaps it in, so queries never
/// observe a half-built state.
#[derive(Debug)]
pub struct SharedPlanner {
    current: RwLock<Arc<PlannerState>>,
}

impl SharedPlanner {
    pub fn new(state: PlannerState) -> Self {
        SharedPlanner { current: RwLock::new(Arc::new(state)) }
    }

    pub fn snapshot(&self) -> Arc<PlannerState> {
        Arc::clone(&self.current.read().expect("planner lock poisoned"))
    }

    pub fn publish(&self, state: PlannerState) {
        *self.current.write().expect("planner lock poisoned") = Arc::new(state);
    }

    pub fn reinit(&self, x_init: Point) -> Result<(), PlannerError> {
        let cur = self.snapshot();
        let next = set_init(Arc::clone(&cur.dissection), x_init, cur.config)?;
        self.publish(next);
        Ok(())
    }

    pub fn get_goal(&self, goal: Point) -> Result<GoalResult, PlannerError> {
        self.snapshot().get_goal(goal)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env_model::Environment;
    use crate::maps::{block_map, rect, sealed_map};

    fn p(x: f64, y: f64) -> Point {
        Point::new(x, y)
    }

    fn ready(env: &Environment, x: Point) -> PlannerState {
        let d = Arc::new(ConvexDissection::build(env).unwrap());
        set_init(d, x, PlannerConfig { interval: 0.5, eps: Some(1e-10), goal_eps: None }).unwrap()
    }

    #[test]
    fn single_polygon_map() {
        let env = Environment::new(rect(0., 0., 10., 10.), vec![]).unwrap();
        let st = ready(&env, p(1., 1.));
        assert_eq!(st.status, Status::Ready);
        assert_eq!(st.reached_count(), 0);
        let g = st.get_goal(p(4., 5.)).unwrap();
        assert_eq!(g.cost, 5.0);
        assert!(g.encoding.is_none());
    }

    #[test]
    fn block_map_sets_and_goal() {
        let st = ready(&block_map(), p(1., 5.));
        assert_eq!(st.reached_count(), st.dissection.cutlines.len());
        for s in &st.sets {
            assert!(!s.is_empty());
            assert!(s.distinct.len() <= 2, "{:?}", s.distinct);
        }
        let g = st.get_goal(p(9., 5.)).unwrap();
        assert!((g.cost - (2.0 * 10f64.sqrt() + 2.0)).abs() < 1e-9, "{}", g.cost);
        assert_eq!(st.stats.rewire_capped, 0);
    }

    #[test]
    fn sealed_chamber_is_unreachable() {
        let st = ready(&sealed_map(), p(1., 5.));
        assert!(matches!(st.get_goal(p(9., 5.)), Err(PlannerError::Unreachable(_))));
        assert!(matches!(st.get_goal(p(6.5, 5.)), Err(PlannerError::NotInFreeSpace(_))));
        let d = &st.dissection;
        for c in &d.cutlines {
            let reachable = d.graph.connected(c.left, d.locate(p(1., 5.)).unwrap());
            assert_eq!(!st.set(c.id).is_empty(), reachable);
        }
    }

    #[test]
    fn snapshot_round_trip_and_hash() {
        let st = ready(&block_map(), p(1., 5.));
        let back = PlannerState::from_json(Arc::clone(&st.dissection), &st.to_json()).unwrap();
        assert_eq!(back.state_hash(), st.state_hash());
        assert_eq!(back.get_goal(p(9., 5.)).unwrap().cost, st.get_goal(p(9., 5.)).unwrap().cost);
    }

    #[test]
    fn stale_neighbour_is_repaired() {
        let mut st = ready(&block_map(), p(1., 5.));
        let before = st.state_hash();
        let victim = CutlineId(0);
        let explored = vec![true; st.dissection.cutlines.len()];
        for r in &mut st.sets[victim.index()].records {
            r.cost += 1.0;
        }
        let nb = st.dissection.cutlines_adjacent_to_cutline(victim).unwrap()[0];
        let triggers = st.optimize_existing(nb, &explored).unwrap();
        assert!(triggers >= 1);
        assert_eq!(st.state_hash(), before);
    }

    #[test]
    fn shared_planner_swaps() {
        let d = Arc::new(ConvexDissection::build(&block_map()).unwrap());
        let st = set_init(Arc::clone(&d), p(1., 5.), PlannerConfig::default()).unwrap();
        let shared = SharedPlanner::new(st);
        let old = shared.snapshot();
        shared.reinit(p(9., 5.)).unwrap();
        assert_eq!(old.x_init, p(1., 5.));
        assert_eq!(shared.snapshot().x_init, p(9., 5.));
    }
}
