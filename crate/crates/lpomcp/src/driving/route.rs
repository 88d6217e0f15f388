//! Route geometry: arc-length parameterized paths with curvature and
//! reference-velocity annotations, plus crossing-point detection
//! between route pairs.

use serde::{Deserialize, Serialize};

use super::ModelError;

/// Identifier of a route within a scenario's route set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct RouteId(pub usize);

impl std::fmt::Display for RouteId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "route{}", self.0)
    }
}

/// One sampled point of a route: Cartesian position, distance along
/// the path, curvature and reference velocity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoutePoint {
    pub x: f64,
    pub y: f64,
    pub l: f64,
    pub kappa: f64,
    pub v_ref: f64,
}

/// Interpolated route data at an arc position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RouteSample {
    pub x: f64,
    pub y: f64,
    pub kappa: f64,
    pub v_ref: f64,
}

/// A path with annotations, parameterized by arc length `l`.
///
/// `l` is the cumulative Cartesian distance between consecutive points,
/// so linear interpolation in `l` is consistent with the geometry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Route {
    id: RouteId,
    points: Vec<RoutePoint>,
}

impl Route {
    pub fn new(id: RouteId, points: Vec<RoutePoint>) -> Result<Self, ModelError> {
        if points.len() < 2 {
            return Err(ModelError::RouteTooShort(id));
        }
        for w in points.windows(2) {
            let dl = w[1].l - w[0].l;
            if dl <= 0.0 {
                return Err(ModelError::RouteArcNotIncreasing(id));
            }
            let dist = ((w[1].x - w[0].x).powi(2) + (w[1].y - w[0].y).powi(2)).sqrt();
            if (dist - dl).abs() > 1e-6 * dl.max(1.0) {
                return Err(ModelError::RouteArcInconsistent(id));
            }
        }
        Ok(Self { id, points })
    }

    /// Builds a route from (x, y, kappa) samples with a constant
    /// reference velocity; `l` is accumulated chord length.
    pub fn from_xy_kappa(id: RouteId, pts: &[(f64, f64, f64)], v_ref: f64) -> Self {
        assert!(pts.len() >= 2);
        let mut points = Vec::with_capacity(pts.len());
        let mut l = 0.0;
        for (i, &(x, y, kappa)) in pts.iter().enumerate() {
            if i > 0 {
                let (px, py, _) = pts[i - 1];
                l += ((x - px).powi(2) + (y - py).powi(2)).sqrt();
            }
            points.push(RoutePoint {
                x,
                y,
                l,
                kappa,
                v_ref,
            });
        }
        Self::new(id, points).expect("constructed routes are consistent")
    }

    pub fn id(&self) -> RouteId {
        self.id
    }

    pub fn points(&self) -> &[RoutePoint] {
        &self.points
    }

    pub fn start_l(&self) -> f64 {
        self.points[0].l
    }

    pub fn end_l(&self) -> f64 {
        self.points[self.points.len() - 1].l
    }

    /// Returns a copy with every reference velocity replaced.
    pub fn with_v_ref(&self, v_ref: f64) -> Route {
        let mut route = self.clone();
        for p in &mut route.points {
            p.v_ref = v_ref;
        }
        route
    }

    /// Returns a copy with a new id.
    pub fn with_id(&self, id: RouteId) -> Route {
        let mut route = self.clone();
        route.id = id;
        route
    }

    fn bracket(&self, l: f64) -> (usize, f64) {
        let pts = &self.points;
        if l <= pts[0].l {
            return (0, 0.0);
        }
        let last = pts.len() - 1;
        if l >= pts[last].l {
            return (last - 1, 1.0);
        }
        // Binary search for the segment containing l.
        let idx = pts.partition_point(|p| p.l <= l) - 1;
        let idx = idx.min(last - 1);
        let seg = pts[idx + 1].l - pts[idx].l;
        ((idx), ((l - pts[idx].l) / seg).clamp(0.0, 1.0))
    }

    /// Linear interpolation of all fields at arc position `l`;
    /// positions beyond the ends clamp to the end values.
    pub fn lookup(&self, l: f64) -> RouteSample {
        let (i, t) = self.bracket(l);
        let a = &self.points[i];
        let b = &self.points[i + 1];
        RouteSample {
            x: a.x + t * (b.x - a.x),
            y: a.y + t * (b.y - a.y),
            kappa: a.kappa + t * (b.kappa - a.kappa),
            v_ref: a.v_ref + t * (b.v_ref - a.v_ref),
        }
    }

    /// Position and heading (radians) at arc position `l`. The heading
    /// is the direction of the bracketing segment.
    pub fn pose(&self, l: f64) -> (f64, f64, f64) {
        let (i, t) = self.bracket(l);
        let a = &self.points[i];
        let b = &self.points[i + 1];
        let heading = (b.y - a.y).atan2(b.x - a.x);
        (a.x + t * (b.x - a.x), a.y + t * (b.y - a.y), heading)
    }

    /// Serializes as CSV with header `x,y,l,kappa,v_ref`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,y,l,kappa,v_ref\n");
        for p in &self.points {
            out.push_str(&format!("{},{},{},{},{}\n", p.x, p.y, p.l, p.kappa, p.v_ref));
        }
        out
    }

    /// Parses the CSV route format.
    pub fn from_csv(id: RouteId, text: &str) -> Result<Self, ModelError> {
        let mut lines = text.lines();
        let header = lines.next().ok_or(ModelError::RouteCsv("empty file".into()))?;
        if header.trim() != "x,y,l,kappa,v_ref" {
            return Err(ModelError::RouteCsv(format!(
                "unexpected header: {header}"
            )));
        }
        let mut points = Vec::new();
        for (lineno, line) in lines.enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 5 {
                return Err(ModelError::RouteCsv(format!(
                    "line {}: expected 5 fields, got {}",
                    lineno + 2,
                    fields.len()
                )));
            }
            let parse = |s: &str| -> Result<f64, ModelError> {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| ModelError::RouteCsv(format!("line {}: {e}", lineno + 2)))
            };
            points.push(RoutePoint {
                x: parse(fields[0])?,
                y: parse(fields[1])?,
                l: parse(fields[2])?,
                kappa: parse(fields[3])?,
                v_ref: parse(fields[4])?,
            });
        }
        Self::new(id, points)
    }
}

/// A crossing of two routes: arc positions on each and the Cartesian
/// location.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConflictPoint {
    pub l_a: f64,
    pub l_b: f64,
    pub x: f64,
    pub y: f64,
}

/// Finds all transversal crossings between two routes by pairwise
/// segment intersection, ordered by arc position on `a`.
pub fn route_conflicts(a: &Route, b: &Route) -> Vec<ConflictPoint> {
    let mut out = Vec::new();
    let pa = a.points();
    let pb = b.points();
    for i in 0..pa.len() - 1 {
        let (x1, y1) = (pa[i].x, pa[i].y);
        let (x2, y2) = (pa[i + 1].x, pa[i + 1].y);
        for j in 0..pb.len() - 1 {
            let (x3, y3) = (pb[j].x, pb[j].y);
            let (x4, y4) = (pb[j + 1].x, pb[j + 1].y);
            let d = (x2 - x1) * (y4 - y3) - (y2 - y1) * (x4 - x3);
            if d.abs() < 1e-12 {
                continue; // parallel or degenerate
            }
            let s = ((x3 - x1) * (y4 - y3) - (y3 - y1) * (x4 - x3)) / d;
            let u = ((x3 - x1) * (y2 - y1) - (y3 - y1) * (x2 - x1)) / d;
            // Half-open on the far end so shared vertices report once.
            if (0.0..1.0).contains(&s) && (0.0..1.0).contains(&u) {
                out.push(ConflictPoint {
                    l_a: pa[i].l + s * (pa[i + 1].l - pa[i].l),
                    l_b: pb[j].l + u * (pb[j + 1].l - pb[j].l),
                    x: x1 + s * (x2 - x1),
                    y: y1 + s * (y2 - y1),
                });
            }
        }
    }
    out.sort_by(|p, q| p.l_a.partial_cmp(&q.l_a).expect("finite arcs"));
    // Merge near-duplicate hits from adjacent segment pairs.
    out.dedup_by(|p, q| (p.l_a - q.l_a).abs() < 0.5 && (p.l_b - q.l_b).abs() < 0.5);
    out
}
