//! Segment sets whose union containment certifies the region swept between
//! two waypoints.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::{Configuration, RigidObject, RotationTable, Vec3};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArcApproxParams {
    /// Largest rotation allowed in one step, radians.
    pub dtheta_max: f64,
}

impl Default for ArcApproxParams {
    fn default() -> Self {
        Self { dtheta_max: PI / 3.0 }
    }
}

impl ArcApproxParams {
    pub fn new(dtheta_max: f64) -> Result<Self> {
        if !(dtheta_max > 0.0 && dtheta_max < PI) {
            return Err(Error::InvalidInput(format!("dtheta_max must lie in (0, π), got {dtheta_max}")));
        }
        Ok(Self { dtheta_max })
    }

    /// Largest index step of a planar table that stays within `dtheta_max`.
    pub fn max_index_step(&self, table: &RotationTable) -> usize {
        ((self.dtheta_max / table.step()) + 1e-9).floor() as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SegmentKind {
    Edge,
    CenterVertex,
    /// Path of one vertex between the two waypoints (a straight connection or
    /// one chord of an arc).
    Connection,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub kind: SegmentKind,
    pub a: Vec3,
    pub b: Vec3,
}

#[derive(Debug, Clone, Default)]
pub struct SegmentSet {
    pub segments: Vec<Segment>,
}

impl SegmentSet {
    pub fn count(&self, kind: SegmentKind) -> usize {
        self.segments.iter().filter(|s| s.kind == kind).count()
    }

    fn push(&mut self, kind: SegmentKind, a: Vec3, b: Vec3) {
        self.segments.push(Segment { kind, a, b });
    }
}

/// Object edges and center-to-vertex segments at one pose.
pub fn static_segments(obj: &RigidObject, q: &Configuration, table: &RotationTable) -> SegmentSet {
    let mut out = SegmentSet::default();
    add_static(&mut out, obj, q, table);
    out
}

fn add_static(out: &mut SegmentSet, obj: &RigidObject, q: &Configuration, table: &RotationTable) {
    let w = obj.transform(q, table);
    for &(i, j) in obj.edges() {
        out.push(SegmentKind::Edge, w[i], w[j]);
    }
    for v in &w {
        out.push(SegmentKind::CenterVertex, q.p, *v);
    }
}

/// Apex of the two tangent chords over the arc of body vector `v` rotated
/// from angle `theta` by `delta`, relative to the rotation center.
pub fn arc_apex(v: &Vec3, theta: f64, delta: f64) -> Vec3 {
    let r = crate::geometry::rot_z(theta + delta / 2.0);
    (r * v) / (delta / 2.0).cos()
}

/// Swept-boundary segments for a planar step that either translates or
/// rotates. Rotations beyond `dtheta_max` are split into equal sub-arcs.
pub fn reachable_boundary_2d(obj: &RigidObject, qa: &Configuration, qb: &Configuration, table: &RotationTable, params: &ArcApproxParams) -> Result<SegmentSet> {
    let moved = qa.p != qb.p;
    let turned = qa.rot != qb.rot;
    if moved && turned {
        return Err(Error::MixedMotion);
    }
    let mut out = SegmentSet::default();
    add_static(&mut out, obj, qa, table);
    if !moved && !turned {
        return Ok(out);
    }
    add_static(&mut out, obj, qb, table);
    if moved {
        let wa = obj.transform(qa, table);
        let wb = obj.transform(qb, table);
        for (a, b) in wa.iter().zip(&wb) {
            out.push(SegmentKind::Connection, *a, *b);
        }
        return Ok(out);
    }
    let total = table.signed_diff(qa.rot, qb.rot) as f64 * table.step();
    let pieces = (total.abs() / params.dtheta_max - 1e-9).ceil().max(1.0) as usize;
    let delta = total / pieces as f64;
    let theta0 = table.angle(qa.rot);
    for v in obj.vertices() {
        if v.norm() == 0.0 {
            continue;
        }
        for k in 0..pieces {
            let th = theta0 + delta * k as f64;
            let a = qa.p + crate::geometry::rot_z(th) * v;
            let b = qa.p + crate::geometry::rot_z(th + delta) * v;
            let apex = qa.p + arc_apex(v, th, delta);
            out.push(SegmentKind::Connection, a, apex);
            out.push(SegmentKind::Connection, apex, b);
        }
    }
    Ok(out)
}

/// Offset from the chord midpoint to the arc apex for body vector `v`,
/// starting at table entry `k` and stepping `s` entries.
pub fn apex_offset(v: &Vec3, table: &RotationTable, k: usize, s: i64) -> Vec3 {
    if s == 0 {
        return Vec3::zeros();
    }
    let n = table.len() as i64;
    let k2 = (k as i64 + s).rem_euclid(n) as usize;
    let delta = s as f64 * table.step();
    let apex = arc_apex(v, table.angle(k), delta);
    apex - (table.get(k) * v + table.get(k2) * v) / 2.0
}

/// Concrete counterpart of the segments the traversal model constrains for
/// one step: per vertex the halves `[A_a, Mid]` and `[Mid, A_b]`, where
/// `Mid` is the chord midpoint for a translation and the arc apex for a
/// rotation, plus the static segments at the end pose when requested.
/// Returns `None` when the step is not admissible in the model (mixed
/// motion or rotation beyond `max_step` entries).
pub fn step_segments_milp(
    obj: &RigidObject,
    qa: &Configuration,
    qb: &Configuration,
    table: &RotationTable,
    max_step: usize,
    end_static: bool,
) -> Option<Vec<(Vec3, Vec3)>> {
    let s = if table.dim() == 2 {
        table.signed_diff(qa.rot, qb.rot)
    } else if qa.rot == qb.rot {
        0
    } else {
        return None;
    };
    if s != 0 && (qa.p != qb.p || s.unsigned_abs() as usize > max_step) {
        return None;
    }
    let wa = obj.transform(qa, table);
    let wb = obj.transform(qb, table);
    let mut out = Vec::with_capacity(2 * wa.len() + obj.edges().len() + wa.len());
    for (i, v) in obj.vertices().iter().enumerate() {
        let mid = (wa[i] + wb[i]) / 2.0 + apex_offset(v, table, qa.rot, s);
        out.push((wa[i], mid));
        out.push((mid, wb[i]));
    }
    if end_static {
        for &(i, j) in obj.edges() {
            out.push((wb[i], wb[j]));
        }
        for v in &wb {
            out.push((qb.p, *v));
        }
    }
    Some(out)
}

/// Faces at both poses and the parallelogram swept by each edge.
#[derive(Debug, Clone, Default)]
pub struct SweptBoundary3d {
    pub triangles: Vec<[Vec3; 3]>,
    /// Cyclic order `a, b, b + d, a + d`; degenerate when the translation is zero.
    pub parallelograms: Vec<[Vec3; 4]>,
}

pub fn reachable_boundary_3d(obj: &RigidObject, pa: &Vec3, pb: &Vec3, rot: usize, table: &RotationTable) -> SweptBoundary3d {
    let wa = obj.transform(&Configuration::new(*pa, rot), table);
    let d = pb - pa;
    let mut out = SweptBoundary3d::default();
    for f in obj.faces() {
        out.triangles.push([wa[f[0]], wa[f[1]], wa[f[2]]]);
    }
    for f in obj.faces() {
        out.triangles.push([wa[f[0]] + d, wa[f[1]] + d, wa[f[2]] + d]);
    }
    for &(i, j) in obj.edges() {
        out.parallelograms.push([wa[i], wa[j], wa[j] + d, wa[i] + d]);
    }
    out
}
