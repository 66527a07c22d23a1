//! Pictures of scenes, covers and plans: SVG for planar scenes, a grouped
//! triangle soup for spatial ones.

use std::fmt::Write as _;

use crate::bench::Pose;
use crate::decompose::CoarseGraph;
use crate::geometry::{Configuration, ConvexPolytope, RigidObject, RotationTable, Scene, Vec3};
use crate::query::MotionPlan;

const OBSTACLE: &str = "#f4a6c0";
const COVER: &str = "#6f9fe0";
const SWEEP: &str = "#5cbf6a";

/// Poses sampled per plan step when drawing sweeps.
const SWEEP_SAMPLES: usize = 8;

#[derive(Debug, Clone, Copy, Default)]
pub struct RenderInput<'a> {
    pub coarse: Option<&'a CoarseGraph>,
    pub plan: Option<&'a MotionPlan>,
    pub object: Option<&'a RigidObject>,
    pub table: Option<&'a RotationTable>,
    pub start: Option<Configuration>,
    pub goal: Option<Configuration>,
}

/// Counter-clockwise vertex cycle of a planar convex set.
fn ccw(mut pts: Vec<Vec3>) -> Vec<Vec3> {
    if pts.is_empty() {
        return pts;
    }
    let c = pts.iter().sum::<Vec3>() / pts.len() as f64;
    pts.sort_by(|a, b| (a.y - c.y).atan2(a.x - c.x).total_cmp(&(b.y - c.y).atan2(b.x - c.x)));
    pts.dedup_by(|a, b| (*a - *b).norm() < 1e-12);
    pts
}

/// Planar convex hull (monotone chain), counter-clockwise.
fn hull_2d(pts: &[Vec3]) -> Vec<Vec3> {
    let mut p: Vec<Vec3> = pts.to_vec();
    p.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    p.dedup_by(|a, b| (*a - *b).norm() < 1e-12);
    if p.len() < 3 {
        return p;
    }
    let cross = |o: &Vec3, a: &Vec3, b: &Vec3| (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
    let mut h: Vec<Vec3> = Vec::with_capacity(2 * p.len());
    for pass in 0..2 {
        let start = h.len();
        let it: Box<dyn Iterator<Item = &Vec3>> = if pass == 0 { Box::new(p.iter()) } else { Box::new(p.iter().rev()) };
        for x in it {
            while h.len() >= start + 2 && cross(&h[h.len() - 2], &h[h.len() - 1], x) <= 0.0 {
                h.pop();
            }
            h.push(*x);
        }
        h.pop();
    }
    h
}

/// World-frame points swept by each plan segment, sampled along the
/// interpolated motion.
pub fn segment_sweeps(plan: &MotionPlan, obj: &RigidObject, table: &RotationTable) -> Vec<Vec<Vec3>> {
    plan.segments
        .iter()
        .map(|seg| {
            let mut pts = Vec::new();
            let poses: Vec<Pose> = seg.waypoints.iter().map(|q| Pose::from_config(q, table)).collect();
            if poses.len() == 1 {
                pts.extend(poses[0].world(obj));
            }
            for w in poses.windows(2) {
                for i in 0..=SWEEP_SAMPLES {
                    pts.extend(w[0].interpolate(&w[1], i as f64 / SWEEP_SAMPLES as f64).world(obj));
                }
            }
            pts
        })
        .collect()
}

fn points_attr(pts: &[Vec3], y_max: f64) -> String {
    pts.iter().map(|p| format!("{:.4},{:.4}", p.x, y_max - p.y)).collect::<Vec<_>>().join(" ")
}

fn polygon(out: &mut String, class: &str, fill: &str, opacity: f64, pts: &[Vec3], y_max: f64) {
    let _ = writeln!(
        out,
        r#"  <polygon class="{class}" points="{}" fill="{fill}" fill-opacity="{opacity}" stroke="{fill}" stroke-width="0.02"/>"#,
        points_attr(pts, y_max)
    );
}

/// Object outline at `q`: the boundary cycle when there is one, else the hull.
fn pose_outline(obj: &RigidObject, q: &Configuration, table: &RotationTable) -> Vec<Vec3> {
    let world = obj.transform(q, table);
    match obj.outline_cycle() {
        Some(cycle) => cycle.iter().map(|&i| world[i]).collect(),
        None => hull_2d(&world),
    }
}

/// SVG picture of a planar scene. Scene y points up; the image is flipped
/// so it reads the same way.
pub fn render_svg(scene: &Scene, input: &RenderInput) -> String {
    let (lo, hi) = (scene.lo, scene.hi);
    let y_max = hi.y + lo.y;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{} {} {} {}" width="800" height="{:.0}">"#,
        lo.x,
        lo.y,
        hi.x - lo.x,
        hi.y - lo.y,
        800.0 * (hi.y - lo.y) / (hi.x - lo.x)
    );
    let _ = writeln!(
        out,
        r#"  <rect class="bounds" x="{}" y="{}" width="{}" height="{}" fill="white" stroke="black" stroke-width="0.04"/>"#,
        lo.x,
        lo.y,
        hi.x - lo.x,
        hi.y - lo.y
    );
    if let Some(g) = input.coarse {
        for p in &g.polytopes {
            polygon(&mut out, "cover", COVER, 0.25, &ccw(p.vertices()), y_max);
        }
        let centers: Vec<Vec3> = g
            .polytopes
            .iter()
            .map(|p| p.chebyshev_center().map(|c| c.0).unwrap_or_else(|_| Vec3::zeros()))
            .collect();
        for &(i, j) in &g.edges {
            let (a, b) = (centers[i], centers[j]);
            let _ = writeln!(
                out,
                r#"  <line class="adjacency" x1="{:.4}" y1="{:.4}" x2="{:.4}" y2="{:.4}" stroke="{COVER}" stroke-width="0.03"/>"#,
                a.x,
                y_max - a.y,
                b.x,
                y_max - b.y
            );
        }
        for c in &centers {
            let _ = writeln!(
                out,
                r#"  <circle class="center" cx="{:.4}" cy="{:.4}" r="0.08" fill="{COVER}"/>"#,
                c.x,
                y_max - c.y
            );
        }
    }
    for o in &scene.obstacles {
        polygon(&mut out, "obstacle", OBSTACLE, 1.0, &ccw(o.vertices()), y_max);
    }
    if let (Some(obj), Some(table)) = (input.object, input.table) {
        if let Some(plan) = input.plan {
            for pts in segment_sweeps(plan, obj, table) {
                polygon(&mut out, "sweep", SWEEP, 0.35, &hull_2d(&pts), y_max);
            }
        }
        for (class, q) in [("start", input.start), ("goal", input.goal)] {
            if let Some(q) = q {
                let _ = writeln!(
                    out,
                    r#"  <polygon class="{class}" points="{}" fill="none" stroke="black" stroke-width="0.04"/>"#,
                    points_attr(&pose_outline(obj, &q, table), y_max)
                );
            }
        }
    }
    out.push_str("</svg>\n");
    out
}

/// Boundary triangles of a 3D convex polytope, each facet fanned from its
/// centroid so normals point outward.
pub fn polytope_triangles(p: &ConvexPolytope) -> Vec<[Vec3; 3]> {
    let verts = p.vertices();
    let mut tris = Vec::new();
    for (a, b) in p.rows().iter().zip(p.offsets()) {
        let mut face: Vec<Vec3> = verts.iter().filter(|v| (a.dot(v) - b).abs() < 1e-7).copied().collect();
        if face.len() < 3 {
            continue;
        }
        let c = face.iter().sum::<Vec3>() / face.len() as f64;
        let u = (face[0] - c).normalize();
        let w = a.cross(&u);
        face.sort_by(|x, y| (x - c).dot(&w).atan2((x - c).dot(&u)).total_cmp(&(y - c).dot(&w).atan2((y - c).dot(&u))));
        face.dedup_by(|x, y| (*x - *y).norm() < 1e-12);
        for k in 0..face.len() {
            tris.push([c, face[k], face[(k + 1) % face.len()]]);
        }
    }
    tris
}

/// Triangle soup: `g <role>` starts a group (bounds, obstacle, cover, sweep,
/// start, goal), each `t` line holds nine coordinates.
pub fn render_mesh(scene: &Scene, input: &RenderInput) -> String {
    let mut out = String::from("# polytraverse mesh\n");
    let group = |out: &mut String, role: &str, tris: &[[Vec3; 3]]| {
        let _ = writeln!(out, "g {role}");
        for t in tris {
            let c: Vec<String> = t.iter().flat_map(|v| [v.x, v.y, v.z]).map(|x| format!("{x:.6}")).collect();
            let _ = writeln!(out, "t {}", c.join(" "));
        }
    };
    if let Ok(b) = ConvexPolytope::from_box(scene.lo, scene.hi, 3) {
        group(&mut out, "bounds", &polytope_triangles(&b));
    }
    for o in &scene.obstacles {
        group(&mut out, "obstacle", &polytope_triangles(o));
    }
    if let Some(g) = input.coarse {
        for p in &g.polytopes {
            group(&mut out, "cover", &polytope_triangles(p));
        }
    }
    if let (Some(obj), Some(table)) = (input.object, input.table) {
        if let Some(plan) = input.plan {
            for pts in segment_sweeps(plan, obj, table) {
                if let Ok(h) = ConvexPolytope::from_points(3, &pts) {
                    group(&mut out, "sweep", &polytope_triangles(&h));
                }
            }
        }
        for (role, q) in [("start", input.start), ("goal", input.goal)] {
            if let Some(q) = q {
                let world = obj.transform(&q, table);
                let tris: Vec<[Vec3; 3]> = obj.faces().iter().map(|f| [world[f[0]], world[f[1]], world[f[2]]]).collect();
                group(&mut out, role, &tris);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hull_of_square_with_interior_point() {
        let pts = [(0.0, 0.0), (1.0, 0.0), (0.5, 0.5), (1.0, 1.0), (0.0, 1.0)].map(|(x, y)| Vec3::new(x, y, 0.0));
        let h = hull_2d(&pts);
        assert_eq!(h.len(), 4);
        let area: f64 = (0..4).map(|i| h[i].x * h[(i + 1) % 4].y - h[(i + 1) % 4].x * h[i].y).sum::<f64>() / 2.0;
        assert!((area - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cube_facets_fan_outward() {
        let c = ConvexPolytope::from_box(Vec3::zeros(), Vec3::new(1.0, 1.0, 1.0), 3).unwrap();
        let tris = polytope_triangles(&c);
        // Centroid fans give four triangles per square face.
        assert_eq!(tris.len(), 24);
        let centre = Vec3::new(0.5, 0.5, 0.5);
        for t in &tris {
            let n = (t[1] - t[0]).cross(&(t[2] - t[0]));
            assert!(n.dot(&(t[0] - centre)) > 0.0);
        }
    }
}
