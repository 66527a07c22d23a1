//! Desk-scale scenes, objects and queries shared by tests, benches and the CLI.

use crate::decompose::DecomposeParams;
use crate::densegraph::DenseParams;
use crate::error::Result;
use crate::geometry::{Configuration, ConvexPolytope, RigidObject, RotationTable, Scene, Vec3};

#[derive(Debug, Clone)]
pub struct Fixture {
    pub name: String,
    pub scene: Scene,
    pub object: RigidObject,
    pub start: Configuration,
    pub goal: Configuration,
    pub decompose: DecomposeParams,
    pub dense: DenseParams,
}

fn v(x: f64, y: f64) -> Vec3 {
    Vec3::new(x, y, 0.0)
}

fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> Result<ConvexPolytope> {
    ConvexPolytope::from_box(v(x0, y0), v(x1, y1), 2)
}

fn cube(lo: [f64; 3], hi: [f64; 3]) -> Result<ConvexPolytope> {
    ConvexPolytope::from_box(Vec3::from(lo), Vec3::from(hi), 3)
}

/// Thin rectangle 1.2 × 0.1.
pub fn stick() -> RigidObject {
    RigidObject::rectangle(1.2, 0.1)
}

/// L-shaped plate with arms 1.2 and 0.8 and width 0.1, centered in its corner square.
pub fn l_object() -> Result<RigidObject> {
    RigidObject::polygon(
        vec![v(0.0, 0.0), v(1.2, 0.0), v(1.2, 0.1), v(0.1, 0.1), v(0.1, 0.8), v(0.0, 0.8)],
        Some(v(0.05, 0.05)),
    )
}

/// Flat box 1.0 × 0.8 × 0.1.
pub fn pad() -> RigidObject {
    RigidObject::cuboid(1.0, 0.8, 0.1)
}

/// An L-shaped corridor of width 2: along the bottom, then up the right side.
pub fn corner_scene() -> Result<Scene> {
    Scene::new(2, v(0.0, 0.0), v(8.0, 8.0), vec![rect(0.0, 2.0, 6.0, 8.0)?])
}

fn corner_params() -> DecomposeParams {
    DecomposeParams {
        n_v: 256,
        seed: 1,
        ..DecomposeParams::default()
    }
}

/// Stick turning the corner: horizontal at the start, vertical at the goal.
pub fn corner() -> Result<Fixture> {
    Ok(Fixture {
        name: "corner".into(),
        scene: corner_scene()?,
        object: stick(),
        start: Configuration::new(v(1.0, 1.0), 0),
        goal: Configuration::new(v(7.0, 7.0), 3),
        decompose: corner_params(),
        dense: DenseParams {
            n_t: 48,
            ..DenseParams::default()
        },
    })
}

/// The L-shaped object in the corner scene (same decomposition as [`corner`]).
pub fn corner_l() -> Result<Fixture> {
    Ok(Fixture {
        name: "corner-l".into(),
        object: l_object()?,
        start: Configuration::new(v(1.0, 0.6), 0),
        goal: Configuration::new(v(7.0, 6.0), 3),
        ..corner()?
    })
}

/// Index of the cube-group rotation by 90° about z.
pub fn quarter_turn_z(table: &RotationTable) -> usize {
    (0..table.len())
        .find(|&k| {
            let m = table.get(k);
            (m * Vec3::x() - Vec3::y()).norm() < 1e-12 && (m * Vec3::z() - Vec3::z()).norm() < 1e-12
        })
        .expect("cube group contains the quarter turn")
}

/// A horizontal slab at mid height with a square window; the pad rises
/// through it.
pub fn slab_scene() -> Result<Scene> {
    let (z0, z1) = (1.8, 2.2);
    let walls = vec![
        cube([0.0, 0.0, z0], [4.0, 1.2, z1])?,
        cube([0.0, 2.8, z0], [4.0, 4.0, z1])?,
        cube([0.0, 1.2, z0], [1.2, 2.8, z1])?,
        cube([2.8, 1.2, z0], [4.0, 2.8, z1])?,
    ];
    Scene::new(3, Vec3::zeros(), Vec3::repeat(4.0), walls)
}

pub fn slab() -> Result<Fixture> {
    let table = RotationTable::cube_group();
    Ok(Fixture {
        name: "slab".into(),
        scene: slab_scene()?,
        object: pad(),
        start: Configuration::new(Vec3::new(2.0, 2.0, 0.8), 0),
        goal: Configuration::new(Vec3::new(2.0, 2.0, 3.2), quarter_turn_z(&table)),
        decompose: DecomposeParams {
            n_v: 256,
            seed: 1,
            alpha: 0.999,
            ..DecomposeParams::default()
        },
        dense: DenseParams {
            h: Some(0.8),
            node_limit: 0,
            ..DenseParams::defaults_for_dim(3)
        },
    })
}

/// A trap with a side opening, then a wall with a gap (the corridor).
/// `factor` scales the layout; the corridor gap keeps its width apart from
/// `shrink`.
pub fn bugtrap_scene(factor: f64, shrink: f64) -> Result<Scene> {
    let f = factor;
    let gap = 1.6 * shrink;
    let (cx, cy) = (7.5 * f, 5.0 * f);
    let t = 0.3 * f;
    let obstacles = vec![
        rect(2.0 * f, 3.0 * f, 2.0 * f + t, 7.0 * f)?,
        rect(2.0 * f + t, 7.0 * f - t, 6.0 * f, 7.0 * f)?,
        rect(2.0 * f + t, 3.0 * f, 6.0 * f, 3.0 * f + t)?,
        rect(6.0 * f - t, 3.0 * f + t, 6.0 * f, 4.4 * f)?,
        rect(6.0 * f - t, 5.6 * f, 6.0 * f, 7.0 * f - t)?,
        rect(cx, 0.0, cx + 0.5 * f, cy - gap / 2.0)?,
        rect(cx, cy + gap / 2.0, cx + 0.5 * f, 10.0 * f)?,
    ];
    Scene::new(2, v(0.0, 0.0), v(10.0 * f, 10.0 * f), obstacles)
}

pub fn bugtrap(factor: f64, shrink: f64) -> Result<Fixture> {
    let f = factor;
    Ok(Fixture {
        name: format!("bugtrap-x{factor}-w{shrink}"),
        scene: bugtrap_scene(factor, shrink)?,
        object: l_object()?,
        start: Configuration::new(v(4.0 * f, 5.0 * f), 3),
        goal: Configuration::new(v(8.8 * f, 5.0 * f), 0),
        decompose: DecomposeParams {
            n_v: 512,
            seed: 1,
            alpha: 0.999,
            ..DecomposeParams::default()
        },
        dense: DenseParams {
            n_t: 48,
            node_limit: 0,
            ..DenseParams::default()
        },
    })
}
