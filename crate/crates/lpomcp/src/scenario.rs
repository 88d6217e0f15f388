//! Benchmark scenes: route geometries, initial-belief samplers and
//! conflict-point bookkeeping.
//!
//! Five scenes are built in: straight driving, a curve, an imminent
//! crossing collision and an intersection in a low-risk and a high-risk
//! variant. The two intersection variants share the same geometry and
//! differ only in start positions, speeds and reference velocities.

use std::io;
use std::path::{Path, PathBuf};

use rand::{Rng, RngCore};
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::driving::{
    DrivingModel, EgoState, JointState, ModelParams, Route, RouteId, VehicleState,
};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("unknown scenario: {0}")]
    Unknown(String),
    #[error("scenario file: {0}")]
    Format(String),
    #[error("io: {0}")]
    Io(#[from] io::Error),
    #[error(transparent)]
    Model(#[from] crate::driving::ModelError),
}

/// The built-in scenes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    Straight,
    Curve,
    Collision,
    IntersectionLow,
    IntersectionHigh,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 5] = [
        ScenarioKind::Straight,
        ScenarioKind::Curve,
        ScenarioKind::Collision,
        ScenarioKind::IntersectionLow,
        ScenarioKind::IntersectionHigh,
    ];

    /// Short name used in file names and on the command line.
    pub fn label(&self) -> &'static str {
        match self {
            ScenarioKind::Straight => "straight",
            ScenarioKind::Curve => "curve",
            ScenarioKind::Collision => "s_coll",
            ScenarioKind::IntersectionLow => "s_i_lo",
            ScenarioKind::IntersectionHigh => "s_i_hi",
        }
    }
}

impl std::str::FromStr for ScenarioKind {
    type Err = ScenarioError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "straight" => Ok(ScenarioKind::Straight),
            "curve" => Ok(ScenarioKind::Curve),
            "s_coll" | "coll" | "collision" => Ok(ScenarioKind::Collision),
            "s_i_lo" | "intersection_low" => Ok(ScenarioKind::IntersectionLow),
            "s_i_hi" | "intersection_high" => Ok(ScenarioKind::IntersectionHigh),
            other => Err(ScenarioError::Unknown(other.to_string())),
        }
    }
}

/// Initial-belief marginals of one non-ego vehicle: independent
/// Gaussians for position and velocity plus a categorical route prior.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OtherVehicleInit {
    pub mean_l: f64,
    pub std_l: f64,
    pub mean_v: f64,
    pub std_v: f64,
    /// (route, probability); probabilities sum to 1.
    pub route_prior: Vec<(RouteId, f64)>,
}

impl OtherVehicleInit {
    /// Route with the highest prior probability (ties to lowest id).
    pub fn modal_route(&self) -> RouteId {
        let mut best = self.route_prior[0];
        for &(id, p) in &self.route_prior[1..] {
            if p > best.1 {
                best = (id, p);
            }
        }
        best.0
    }

    fn candidate_routes(&self) -> Vec<RouteId> {
        self.route_prior.iter().map(|&(id, _)| id).collect()
    }
}

/// A complete scene: routes, the ego's fixed start, the belief over the
/// other vehicles and the model parameters.
#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    pub name: String,
    pub routes: Vec<Route>,
    pub ego_route: RouteId,
    pub ego_init: EgoState,
    pub others: Vec<OtherVehicleInit>,
    pub params: ModelParams,
}

impl ScenarioConfig {
    pub fn build_model(&self) -> DrivingModel {
        DrivingModel::new(self.routes.clone(), self.ego_route, self.params.clone())
    }

    pub fn route(&self, id: RouteId) -> &Route {
        self.routes
            .iter()
            .find(|r| r.id() == id)
            .unwrap_or_else(|| panic!("unknown {id}"))
    }

    /// Draws an initial state: the ego is fixed, every other vehicle
    /// samples position, velocity (truncated at 0) and route
    /// independently.
    pub fn sample_initial_state(&self, rng: &mut dyn RngCore) -> JointState {
        let mut others = Vec::with_capacity(self.others.len());
        for o in &self.others {
            let l = if o.std_l > 0.0 {
                Normal::new(o.mean_l, o.std_l).expect("finite std").sample(rng)
            } else {
                o.mean_l
            };
            let v = if o.std_v > 0.0 {
                Normal::new(o.mean_v, o.std_v).expect("finite std").sample(rng)
            } else {
                o.mean_v
            };
            let route = sample_categorical(&o.route_prior, rng);
            others.push(VehicleState {
                l,
                v: v.max(0.0),
                route,
            });
        }
        JointState::new(self.ego_init, others)
    }

    /// The distribution mean: exact positions and velocities, modal
    /// routes.
    pub fn mean_initial_state(&self) -> JointState {
        let others = self
            .others
            .iter()
            .map(|o| VehicleState {
                l: o.mean_l,
                v: o.mean_v,
                route: o.modal_route(),
            })
            .collect();
        JointState::new(self.ego_init, others)
    }

    /// Times to the conflict points for a concrete state: one row per
    /// vehicle (ego first), `(l_conflict - l) / v` for every conflict
    /// of the vehicle's route against the other vehicles' candidate
    /// routes. Standing vehicles report infinity.
    pub fn conflict_times(&self, state: &JointState) -> Vec<Vec<f64>> {
        let model = self.build_model();
        let mut rows = Vec::with_capacity(state.others.len() + 1);
        let ego_candidates = vec![self.ego_route];
        let mut vehicle_routes: Vec<Vec<RouteId>> = vec![ego_candidates];
        for o in &self.others {
            vehicle_routes.push(o.candidate_routes());
        }
        let positions: Vec<(RouteId, f64, f64)> = std::iter::once((
            self.ego_route,
            state.ego.l,
            state.ego.v,
        ))
        .chain(state.others.iter().map(|o| (o.route, o.l, o.v)))
        .collect();

        for (k, &(route, l, v)) in positions.iter().enumerate() {
            let mut row = Vec::new();
            for (j, candidates) in vehicle_routes.iter().enumerate() {
                if j == k {
                    continue;
                }
                for &other_route in candidates {
                    if other_route == route {
                        continue;
                    }
                    for c in model.conflicts_between(route, other_route) {
                        row.push(tti(c.l_a - l, v));
                    }
                }
            }
            rows.push(row);
        }
        rows
    }

    /// Times to the conflict points at the mean initial state,
    /// enumerating every candidate route of every vehicle. One row per
    /// vehicle; this is the layout of the published scene tables.
    pub fn candidate_conflict_times(&self) -> Vec<Vec<f64>> {
        let model = self.build_model();
        let mut vehicle_candidates: Vec<(Vec<RouteId>, f64, f64)> =
            vec![(vec![self.ego_route], self.ego_init.l, self.ego_init.v)];
        for o in &self.others {
            vehicle_candidates.push((o.candidate_routes(), o.mean_l, o.mean_v));
        }
        let mut rows = Vec::new();
        for (k, (candidates, l, v)) in vehicle_candidates.iter().enumerate() {
            let mut row = Vec::new();
            for &own_route in candidates {
                for (j, (other_candidates, _, _)) in vehicle_candidates.iter().enumerate() {
                    if j == k {
                        continue;
                    }
                    for &other_route in other_candidates {
                        if other_route == own_route {
                            continue;
                        }
                        for c in model.conflicts_between(own_route, other_route) {
                            row.push(tti(c.l_a - l, *v));
                        }
                    }
                }
            }
            rows.push(row);
        }
        rows
    }

    /// Turns off transition/observation noise and collapses the
    /// initial belief onto its mean.
    pub fn disable_noise(&mut self) {
        self.params.noise_enabled = false;
        for o in &mut self.others {
            o.std_l = 0.0;
            o.std_v = 0.0;
        }
    }

    fn validate(&self) -> Result<(), ScenarioError> {
        if !self.routes.iter().any(|r| r.id() == self.ego_route) {
            return Err(ScenarioError::Format(format!(
                "ego route {} not in route set",
                self.ego_route
            )));
        }
        for (k, o) in self.others.iter().enumerate() {
            if o.route_prior.is_empty() {
                return Err(ScenarioError::Format(format!(
                    "vehicle {k} has an empty route prior"
                )));
            }
            let total: f64 = o.route_prior.iter().map(|&(_, p)| p).sum();
            if (total - 1.0).abs() > 1e-9 {
                return Err(ScenarioError::Format(format!(
                    "vehicle {k} route prior sums to {total}"
                )));
            }
            if o.std_l < 0.0 || o.std_v < 0.0 {
                return Err(ScenarioError::Format(format!(
                    "vehicle {k} has a negative std"
                )));
            }
            for &(id, _) in &o.route_prior {
                if !self.routes.iter().any(|r| r.id() == id) {
                    return Err(ScenarioError::Format(format!(
                        "vehicle {k} references unknown {id}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Writes `scenario.json` plus one `route_<id>.csv` per route into
    /// `dir` and returns the path of the scenario file.
    pub fn save(&self, dir: &Path) -> Result<PathBuf, ScenarioError> {
        std::fs::create_dir_all(dir)?;
        let mut route_files = Vec::new();
        for r in &self.routes {
            let file = format!("route_{}.csv", r.id().0);
            std::fs::write(dir.join(&file), r.to_csv())?;
            route_files.push(RouteRef {
                id: r.id().0,
                csv: file,
            });
        }
        let file = ScenarioFile {
            name: self.name.clone(),
            ego_route: self.ego_route.0,
            ego_init: self.ego_init,
            routes: route_files,
            others: self
                .others
                .iter()
                .map(|o| OtherVehicleRef {
                    mean_l: o.mean_l,
                    std_l: o.std_l,
                    mean_v: o.mean_v,
                    std_v: o.std_v,
                    route_prior: o.route_prior.iter().map(|&(id, p)| (id.0, p)).collect(),
                })
                .collect(),
            params: self.params.clone(),
        };
        let path = dir.join("scenario.json");
        let json = serde_json::to_string_pretty(&file)
            .map_err(|e| ScenarioError::Format(e.to_string()))?;
        std::fs::write(&path, json)?;
        Ok(path)
    }

    /// Loads a scenario file; route CSV paths resolve relative to the
    /// file's directory.
    pub fn load(path: &Path) -> Result<Self, ScenarioError> {
        let text = std::fs::read_to_string(path)?;
        let file: ScenarioFile =
            serde_json::from_str(&text).map_err(|e| ScenarioError::Format(e.to_string()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        let mut routes = Vec::new();
        for r in &file.routes {
            let csv = std::fs::read_to_string(base.join(&r.csv))?;
            routes.push(Route::from_csv(RouteId(r.id), &csv)?);
        }
        let config = ScenarioConfig {
            name: file.name,
            ego_route: RouteId(file.ego_route),
            ego_init: file.ego_init,
            routes,
            others: file
                .others
                .iter()
                .map(|o| OtherVehicleInit {
                    mean_l: o.mean_l,
                    std_l: o.std_l,
                    mean_v: o.mean_v,
                    std_v: o.std_v,
                    route_prior: o
                        .route_prior
                        .iter()
                        .map(|&(id, p)| (RouteId(id), p))
                        .collect(),
                })
                .collect(),
            params: file.params,
        };
        config.validate()?;
        Ok(config)
    }
}

fn tti(distance: f64, v: f64) -> f64 {
    if v <= 0.0 {
        f64::INFINITY
    } else {
        distance / v
    }
}

fn sample_categorical(prior: &[(RouteId, f64)], rng: &mut dyn RngCore) -> RouteId {
    let u: f64 = rng.random_range(0.0..1.0);
    let mut acc = 0.0;
    for &(id, p) in prior {
        acc += p;
        if u < acc {
            return id;
        }
    }
    prior[prior.len() - 1].0
}

#[derive(Serialize, Deserialize)]
struct ScenarioFile {
    name: String,
    ego_route: usize,
    ego_init: EgoState,
    routes: Vec<RouteRef>,
    others: Vec<OtherVehicleRef>,
    params: ModelParams,
}

#[derive(Serialize, Deserialize)]
struct RouteRef {
    id: usize,
    csv: String,
}

#[derive(Serialize, Deserialize)]
struct OtherVehicleRef {
    mean_l: f64,
    std_l: f64,
    mean_v: f64,
    std_v: f64,
    route_prior: Vec<(usize, f64)>,
}

// ---------------------------------------------------------------------------
// Built-in geometry.
//
// The collision scene puts the crossing vehicle 2.71 s from the conflict
// point against the ego's 2.11 s; constant-speed trajectories miss by
// 0.6 s, so the outcome is decided by the behavior noise and by how the
// ego shifts its arrival. The intersection scene has three crossings of
// the ego path (one per candidate route of the other vehicles); its two
// variants share the geometry and differ in starts and speeds.
// ---------------------------------------------------------------------------

fn line_points(from: (f64, f64), to: (f64, f64), step: f64) -> Vec<(f64, f64, f64)> {
    let dx = to.0 - from.0;
    let dy = to.1 - from.1;
    let len = (dx * dx + dy * dy).sqrt();
    let n = (len / step).ceil().max(1.0) as usize;
    (0..=n)
        .map(|i| {
            let t = i as f64 / n as f64;
            (from.0 + t * dx, from.1 + t * dy, 0.0)
        })
        .collect()
}

fn polyline_points(waypoints: &[(f64, f64)], step: f64) -> Vec<(f64, f64, f64)> {
    let mut pts = Vec::new();
    for w in waypoints.windows(2) {
        let seg = line_points(w[0], w[1], step);
        let skip = usize::from(!pts.is_empty());
        pts.extend(seg.into_iter().skip(skip));
    }
    pts
}

fn straight_scene() -> ScenarioConfig {
    let pts = line_points((-10.0, 0.0), (190.0, 0.0), 1.0);
    let route = Route::from_xy_kappa(RouteId(0), &pts, 10.0);
    ScenarioConfig {
        name: ScenarioKind::Straight.label().to_string(),
        routes: vec![route],
        ego_route: RouteId(0),
        ego_init: EgoState { l: 10.0, v: 10.0 },
        others: vec![],
        params: ModelParams {
            swept_collision: true,
            ..ModelParams::default()
        },
    }
}

fn curve_scene() -> ScenarioConfig {
    // Straight approach, a 75 degree arc of radius 20 m (kappa 0.05),
    // straight exit. The ego starts 40 m before the arc.
    let mut pts = line_points((-10.0, 0.0), (40.0, 0.0), 1.0);
    let radius = 20.0;
    let center = (40.0, radius);
    let sweep = 75.0f64.to_radians();
    let n = 60;
    for i in 1..=n {
        let phi = -std::f64::consts::FRAC_PI_2 + sweep * i as f64 / n as f64;
        pts.push((
            center.0 + radius * phi.cos(),
            center.1 + radius * phi.sin(),
            1.0 / radius,
        ));
    }
    // Tangent direction at the end of the arc.
    let end_phi = -std::f64::consts::FRAC_PI_2 + sweep;
    let heading = end_phi + std::f64::consts::FRAC_PI_2;
    let last = *pts.last().unwrap();
    let exit = (
        last.0 + 40.0 * heading.cos(),
        last.1 + 40.0 * heading.sin(),
    );
    let exit_pts = line_points((last.0, last.1), exit, 1.0);
    pts.extend(exit_pts.into_iter().skip(1));
    let route = Route::from_xy_kappa(RouteId(0), &pts, 10.0);
    ScenarioConfig {
        name: ScenarioKind::Curve.label().to_string(),
        routes: vec![route],
        ego_route: RouteId(0),
        ego_init: EgoState { l: 10.0, v: 10.0 },
        others: vec![],
        params: ModelParams {
            swept_collision: true,
            ..ModelParams::default()
        },
    }
}

fn collision_scene() -> ScenarioConfig {
    // Ego northbound on x = 0, conflict at (0, 21.1), ego 21.1 m away
    // at 10 m/s. The other vehicle crosses eastbound on y = 21.1 from
    // 27.1 m away at 10 m/s.
    let ego_pts = line_points((0.0, -10.0), (0.0, 56.1), 1.0);
    let ego_route = Route::from_xy_kappa(RouteId(0), &ego_pts, 10.0);
    let other_pts = line_points((-37.1, 21.1), (40.0, 21.1), 1.0);
    let other_route = Route::from_xy_kappa(RouteId(1), &other_pts, 10.0);
    ScenarioConfig {
        name: ScenarioKind::Collision.label().to_string(),
        routes: vec![ego_route, other_route],
        ego_route: RouteId(0),
        ego_init: EgoState { l: 10.0, v: 10.0 },
        others: vec![OtherVehicleInit {
            mean_l: 10.0,
            std_l: 1.0,
            mean_v: 10.0,
            std_v: 1.0,
            route_prior: vec![(RouteId(1), 1.0)],
        }],
        params: ModelParams {
            swept_collision: true,
            ..ModelParams::default()
        },
    }
}

/// Shared intersection geometry. The ego heads north on x = 0 and
/// vehicle 1 east on y = 0; vehicle 2 approaches from the south on one
/// of two slightly bent candidate routes, each crossing first the ego
/// path and then vehicle 1's lane.
struct IntersectionGeometry {
    routes: Vec<Route>,
}

// Frozen layout constants. Arc positions of the crossings:
//   ego route:   x A 52.6387, x B 51.1211, x V1 64.4801
//   v1  route:   x ego 49.9130, x B 51.9824, x A 57.8046
//   v2 route A:  x ego 65.2713, x V1 79.5698
//   v2 route B:  x ego 67.1372, x V1 81.0116
fn intersection_geometry() -> IntersectionGeometry {
    let ego_pts = line_points((0.0, -64.4801), (0.0, 35.52), 1.0);
    let ego = Route::from_xy_kappa(RouteId(0), &ego_pts, 10.0);

    let v1_pts = line_points((-49.9130, 0.0), (40.09, 0.0), 1.0);
    let v1 = Route::from_xy_kappa(RouteId(1), &v1_pts, 10.0);

    // Route A: approach from the southwest through the ego line at
    // (0, -11.8414), a shallow bend, vehicle 1's lane at (7.8915, 0),
    // then northeast out.
    let a_pts = polyline_points(
        &[
            (-36.1975, -66.1561),
            (0.0, -11.8414),
            (4.5270, -6.3080),
            (7.8915, 0.0),
            (24.3585, 30.8780),
        ],
        1.0,
    );
    let route_a = Route::from_xy_kappa(RouteId(2), &a_pts, 10.0);

    // Route B: steeper approach through the ego line at (0, -13.3590),
    // a bend east, vehicle 1's lane at (2.0694, 0), then northeast.
    let b_pts = polyline_points(
        &[
            (-10.2773, -79.7048),
            (0.0, -13.3590),
            (2.5782, -6.9186),
            (2.0694, 0.0),
            (19.5694, 17.5),
        ],
        1.0,
    );
    let route_b = Route::from_xy_kappa(RouteId(3), &b_pts, 10.0);

    IntersectionGeometry {
        routes: vec![ego, v1, route_a, route_b],
    }
}

struct IntersectionVariant {
    label: &'static str,
    ego_l: f64,
    ego_v: f64,
    v1_l: f64,
    v1_v: f64,
    v2_l: f64,
    v2_v: f64,
}

const INTERSECTION_LOW: IntersectionVariant = IntersectionVariant {
    label: "s_i_lo",
    ego_l: 10.0,
    ego_v: 8.0,
    v1_l: 10.0,
    v1_v: 10.0,
    v2_l: 10.0,
    v2_v: 9.0,
};

const INTERSECTION_HIGH: IntersectionVariant = IntersectionVariant {
    label: "s_i_hi",
    ego_l: 42.0308,
    ego_v: 3.9875,
    v1_l: 37.3314,
    v1_v: 4.5305,
    v2_l: 50.0994,
    v2_v: 4.9781,
};

fn intersection_scene(variant: &IntersectionVariant) -> ScenarioConfig {
    let geometry = intersection_geometry();
    let mut routes = geometry.routes;
    // Reference velocities track the scenario's mean speeds.
    routes[0] = routes[0].with_v_ref(variant.ego_v);
    routes[1] = routes[1].with_v_ref(variant.v1_v);
    routes[2] = routes[2].with_v_ref(variant.v2_v);
    routes[3] = routes[3].with_v_ref(variant.v2_v);
    ScenarioConfig {
        name: variant.label.to_string(),
        routes,
        ego_route: RouteId(0),
        ego_init: EgoState {
            l: variant.ego_l,
            v: variant.ego_v,
        },
        others: vec![
            OtherVehicleInit {
                mean_l: variant.v1_l,
                std_l: 1.0,
                mean_v: variant.v1_v,
                std_v: 1.0,
                route_prior: vec![(RouteId(1), 1.0)],
            },
            OtherVehicleInit {
                mean_l: variant.v2_l,
                std_l: 1.0,
                mean_v: variant.v2_v,
                std_v: 1.0,
                route_prior: vec![(RouteId(2), 0.5), (RouteId(3), 0.5)],
            },
        ],
        params: ModelParams {
            swept_collision: true,
            ..ModelParams::default()
        },
    }
}

/// Builds one of the five built-in scenes.
pub fn build_scenario(kind: ScenarioKind) -> ScenarioConfig {
    let config = match kind {
        ScenarioKind::Straight => straight_scene(),
        ScenarioKind::Curve => curve_scene(),
        ScenarioKind::Collision => collision_scene(),
        ScenarioKind::IntersectionLow => intersection_scene(&INTERSECTION_LOW),
        ScenarioKind::IntersectionHigh => intersection_scene(&INTERSECTION_HIGH),
    };
    config.validate().expect("built-in scenes are valid");
    config
}

/// Resolves a scenario argument: a built-in name or a path to a
/// scenario file.
pub fn resolve_scenario(arg: &str) -> Result<ScenarioConfig, ScenarioError> {
    if let Ok(kind) = arg.parse::<ScenarioKind>() {
        return Ok(build_scenario(kind));
    }
    let path = Path::new(arg);
    if path.exists() {
        ScenarioConfig::load(path)
    } else {
        Err(ScenarioError::Unknown(arg.to_string()))
    }
}
