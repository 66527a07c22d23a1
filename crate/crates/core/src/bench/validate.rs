//! Sampling validator. Deliberately independent of the constraint encoding:
//! rotations are interpolated along the true arc (slerp in 3D), and depths
//! come from small LPs over the posed body.

use nalgebra::{UnitQuaternion, Vector3};
use rayon::prelude::*;

use crate::geometry::{Configuration, ConvexPolytope, RigidObject, RotationTable, Scene, Vec3};
use crate::query::MotionPlan;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub p: Vec3,
    pub r: UnitQuaternion<f64>,
}

impl Pose {
    pub fn new(p: Vec3, r: UnitQuaternion<f64>) -> Self {
        Self { p, r }
    }

    pub fn planar(p: Vec3, theta: f64) -> Self {
        Self::new(p, UnitQuaternion::from_axis_angle(&Vector3::z_axis(), theta))
    }

    /// Planar tables are rebuilt from the angle `2πk/n`, not read from the table.
    pub fn from_config(q: &Configuration, table: &RotationTable) -> Self {
        if table.dim() == 2 {
            Self::planar(q.p, 2.0 * std::f64::consts::PI * q.rot as f64 / table.len() as f64)
        } else {
            Self::new(q.p, UnitQuaternion::from_matrix(table.get(q.rot)))
        }
    }

    /// Linear in translation, shortest great arc in rotation.
    pub fn interpolate(&self, other: &Self, s: f64) -> Self {
        let p = self.p + (other.p - self.p) * s;
        let mut to = other.r;
        if self.r.coords.dot(&to.coords) < 0.0 {
            to = UnitQuaternion::new_unchecked(-to.into_inner());
        }
        let r = self.r.try_slerp(&to, s, 1e-12).unwrap_or_else(|| {
            // Half turn: any great arc is shortest; pick the body z axis.
            let half = self.r.rotation_to(&to);
            let axis = self.r * Vector3::z_axis();
            UnitQuaternion::from_axis_angle(&axis, half.angle() * s) * self.r
        });
        Self::new(p, r)
    }

    pub fn angle_to(&self, other: &Self) -> f64 {
        self.r.angle_to(&other.r)
    }

    pub fn world(&self, obj: &RigidObject) -> Vec<Vec3> {
        obj.vertices().iter().map(|v| self.r * v + self.p).collect()
    }
}

fn cross2(o: &Vec3, a: &Vec3, b: &Vec3) -> f64 {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

fn in_triangle(p: &Vec3, a: &Vec3, b: &Vec3, c: &Vec3) -> bool {
    cross2(a, b, p) >= 0.0 && cross2(b, c, p) >= 0.0 && cross2(c, a, p) >= 0.0
}

/// Ear clipping of a simple polygon given as a vertex cycle.
fn ear_clip(pts: &[Vec3], cycle: &[usize]) -> Vec<[usize; 3]> {
    let mut ring = cycle.to_vec();
    let area: f64 = (0..ring.len())
        .map(|i| cross2(&Vec3::zeros(), &pts[ring[i]], &pts[ring[(i + 1) % ring.len()]]))
        .sum();
    if area < 0.0 {
        ring.reverse();
    }
    let mut out = Vec::new();
    while ring.len() > 3 {
        let n = ring.len();
        let ear = (0..n).find(|&i| {
            let (a, b, c) = (ring[(i + n - 1) % n], ring[i], ring[(i + 1) % n]);
            cross2(&pts[a], &pts[b], &pts[c]) > 1e-15
                && ring
                    .iter()
                    .filter(|&&k| k != a && k != b && k != c)
                    .all(|&k| !in_triangle(&pts[k], &pts[a], &pts[b], &pts[c]))
        });
        let Some(i) = ear else { break };
        out.push([ring[(i + n - 1) % n], ring[i], ring[(i + 1) % n]]);
        ring.remove(i);
    }
    if ring.len() == 3 {
        out.push([ring[0], ring[1], ring[2]]);
    }
    out
}

/// Convex pieces whose union is the solid body: ear-clipped triangles of a
/// planar outline, the segment of a stick, otherwise the hull of all
/// vertices (3D objects are taken as convex).
pub fn body_pieces(obj: &RigidObject) -> Vec<Vec<usize>> {
    let n = obj.vertices().len();
    if obj.dim() == 2 {
        if let Some(cycle) = obj.outline_cycle() {
            let tris = ear_clip(obj.vertices(), &cycle);
            if !tris.is_empty() {
                return tris.into_iter().map(|t| t.to_vec()).collect();
            }
        }
    }
    vec![(0..n).collect()]
}

/// Largest distance from the obstacle boundary reached by a point of the
/// convex hull of `pts` inside the obstacle; zero when they do not overlap.
pub fn penetration_depth(pts: &[Vec3], obstacle: &ConvexPolytope) -> f64 {
    let rows = obstacle.rows();
    let b = obstacle.offsets();
    // A facet that all points lie beyond separates the hull from the obstacle.
    if rows.iter().zip(b).any(|(a, bi)| pts.iter().all(|x| a.dot(x) >= *bi)) {
        return 0.0;
    }
    let mut lp = minilp::Problem::new(minilp::OptimizationDirection::Maximize);
    let lam: Vec<minilp::Variable> = pts.iter().map(|_| lp.add_var(0.0, (0.0, 1.0))).collect();
    let t = lp.add_var(1.0, (f64::NEG_INFINITY, f64::INFINITY));
    for (a, bi) in rows.iter().zip(b) {
        let mut e = minilp::LinearExpr::empty();
        for (l, x) in lam.iter().zip(pts) {
            e.add(*l, a.dot(x));
        }
        e.add(t, 1.0);
        lp.add_constraint(e, minilp::ComparisonOp::Le, *bi);
    }
    let mut sum = minilp::LinearExpr::empty();
    for l in &lam {
        sum.add(*l, 1.0);
    }
    lp.add_constraint(sum, minilp::ComparisonOp::Eq, 1.0);
    match lp.solve() {
        Ok(sol) => sol[t].max(0.0),
        // The hull is bounded and nonempty, so the LP always has an optimum;
        // treat solver trouble as a violation rather than hide it.
        Err(_) => f64::INFINITY,
    }
}

/// Largest distance by which a point leaves the scene bounds.
pub fn bounds_exit(pts: &[Vec3], scene: &Scene) -> f64 {
    let mut worst: f64 = 0.0;
    for x in pts {
        for k in 0..scene.dim {
            worst = worst.max(scene.lo[k] - x[k]).max(x[k] - scene.hi[k]);
        }
    }
    worst
}

/// `(penetration, exit)` of the body at one pose.
pub fn pose_depths(scene: &Scene, obj: &RigidObject, pieces: &[Vec<usize>], pose: &Pose) -> (f64, f64) {
    let world = pose.world(obj);
    let mut pen: f64 = 0.0;
    for piece in pieces {
        let pts: Vec<Vec3> = piece.iter().map(|&i| world[i]).collect();
        for o in &scene.obstacles {
            pen = pen.max(penetration_depth(&pts, o));
        }
    }
    (pen, bounds_exit(&world, scene))
}

/// Obstacle penetration of the object at a grid configuration.
pub fn pose_penetration(scene: &Scene, obj: &RigidObject, q: &Configuration, table: &RotationTable) -> f64 {
    pose_depths(scene, obj, &body_pieces(obj), &Pose::from_config(q, table)).0
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    /// Poses checked per plan segment.
    pub samples: Vec<usize>,
    pub max_penetration: f64,
    pub max_exit: f64,
    /// Step index of the deepest violation.
    pub worst_step: Option<usize>,
    pub pass: bool,
}

/// Samples every step at `samples + 1` evenly spaced parameters.
pub fn validate_steps(steps: &[(Pose, Pose)], scene: &Scene, obj: &RigidObject, samples: usize, eps: f64) -> (Vec<(f64, f64)>, ValidationReport) {
    let pieces = body_pieces(obj);
    let n = samples.max(1);
    let per_step: Vec<(f64, f64)> = steps
        .par_iter()
        .map(|(a, b)| {
            let mut worst = (0.0f64, 0.0f64);
            for i in 0..=n {
                let pose = a.interpolate(b, i as f64 / n as f64);
                let (p, e) = pose_depths(scene, obj, &pieces, &pose);
                worst = (worst.0.max(p), worst.1.max(e));
            }
            worst
        })
        .collect();
    let max_penetration = per_step.iter().map(|w| w.0).fold(0.0, f64::max);
    let max_exit = per_step.iter().map(|w| w.1).fold(0.0, f64::max);
    let worst_step = per_step
        .iter()
        .enumerate()
        .filter(|(_, w)| w.0.max(w.1) > eps)
        .max_by(|a, b| a.1 .0.max(a.1 .1).total_cmp(&b.1 .0.max(b.1 .1)))
        .map(|(i, _)| i);
    let report = ValidationReport {
        samples: vec![steps.len() * (n + 1)],
        max_penetration,
        max_exit,
        worst_step,
        pass: max_penetration <= eps && max_exit <= eps,
    };
    (per_step, report)
}

pub fn validate_waypoints(path: &[Configuration], scene: &Scene, obj: &RigidObject, table: &RotationTable, samples: usize, eps: f64) -> ValidationReport {
    let poses: Vec<Pose> = path.iter().map(|q| Pose::from_config(q, table)).collect();
    let steps: Vec<(Pose, Pose)> = if poses.len() == 1 {
        vec![(poses[0], poses[0])]
    } else {
        poses.windows(2).map(|w| (w[0], w[1])).collect()
    };
    validate_steps(&steps, scene, obj, samples, eps).1
}

pub fn validate_plan(plan: &MotionPlan, scene: &Scene, obj: &RigidObject, table: &RotationTable, samples: usize, eps: f64) -> ValidationReport {
    let mut steps = Vec::new();
    let mut counts = Vec::new();
    for s in &plan.segments {
        let poses: Vec<Pose> = s.waypoints.iter().map(|q| Pose::from_config(q, table)).collect();
        let before = steps.len();
        steps.extend(poses.windows(2).map(|w| (w[0], w[1])));
        counts.push((steps.len() - before) * (samples.max(1) + 1));
    }
    let (_, mut rep) = validate_steps(&steps, scene, obj, samples, eps);
    rep.samples = counts;
    rep
}
