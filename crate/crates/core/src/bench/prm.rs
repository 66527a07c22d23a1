//! Probabilistic roadmap baseline with resolution-limited collision checks.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;
use std::time::{Duration, Instant};

use nalgebra::{Quaternion, UnitQuaternion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::validate::{body_pieces, pose_depths, Pose};
use crate::geometry::{RigidObject, Scene, Vec3};

#[derive(Debug, Clone, PartialEq)]
pub struct PrmParams {
    pub n_samples: usize,
    /// Spacing of checked states along an edge, as a fraction of the object length.
    pub resolution: f64,
    pub time_budget: Duration,
    pub k: usize,
    pub seed: u64,
    pub eps: f64,
}

impl Default for PrmParams {
    fn default() -> Self {
        Self {
            n_samples: 500,
            resolution: 0.05,
            time_budget: Duration::from_secs(15),
            k: 10,
            seed: 0,
            eps: 1e-6,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PrmRoadmap {
    pub nodes: Vec<Pose>,
    pub edges: Vec<(usize, usize)>,
    pub params: PrmParams,
    /// Poses checked so far, endpoints included.
    pub checks: usize,
    adj: Vec<Vec<(usize, f64)>>,
    rng: ChaCha8Rng,
    pieces: Vec<Vec<usize>>,
    r_max: f64,
    length: f64,
}

/// Translation distance plus the arc swept by the farthest vertex.
pub fn pose_distance(a: &Pose, b: &Pose, r_max: f64) -> f64 {
    (a.p - b.p).norm() + r_max * a.angle_to(b)
}

fn sample_pose(scene: &Scene, rng: &mut ChaCha8Rng) -> Pose {
    let mut p = Vec3::zeros();
    for k in 0..scene.dim {
        p[k] = rng.gen_range(scene.lo[k]..=scene.hi[k]);
    }
    if scene.dim == 2 {
        return Pose::planar(p, rng.gen_range(0.0..2.0 * PI));
    }
    let (u1, u2, u3): (f64, f64, f64) = (rng.gen(), rng.gen(), rng.gen());
    let (a, b) = ((1.0 - u1).sqrt(), u1.sqrt());
    let q = Quaternion::new(
        b * (2.0 * PI * u3).cos(),
        a * (2.0 * PI * u2).sin(),
        a * (2.0 * PI * u2).cos(),
        b * (2.0 * PI * u3).sin(),
    );
    Pose::new(p, UnitQuaternion::from_quaternion(q))
}

impl PrmRoadmap {
    fn free(&mut self, scene: &Scene, obj: &RigidObject, pose: &Pose) -> bool {
        self.checks += 1;
        let (pen, exit) = pose_depths(scene, obj, &self.pieces, pose);
        pen <= self.params.eps && exit <= self.params.eps
    }

    /// Number of intervals an edge is split into: the smallest power of two
    /// keeping checked states within the resolution, so halving the
    /// resolution only adds states.
    pub fn intervals(&self, a: &Pose, b: &Pose) -> usize {
        let step = self.params.resolution * self.length;
        let d = pose_distance(a, b, self.r_max);
        let mut n = 1;
        while d / n as f64 > step {
            n *= 2;
        }
        n
    }

    pub fn edge_free(&mut self, scene: &Scene, obj: &RigidObject, a: &Pose, b: &Pose) -> bool {
        let n = self.intervals(a, b);
        (1..n).all(|i| self.free(scene, obj, &a.interpolate(b, i as f64 / n as f64)))
    }

    fn nearest(&self, x: &Pose, skip: usize) -> Vec<(usize, f64)> {
        let mut d: Vec<(usize, f64)> = self
            .nodes
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != skip)
            .map(|(i, y)| (i, pose_distance(x, y, self.r_max)))
            .collect();
        d.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        d.truncate(self.params.k);
        d
    }

    fn add_node(&mut self, scene: &Scene, obj: &RigidObject, x: Pose) -> usize {
        let id = self.nodes.len();
        self.nodes.push(x);
        self.adj.push(Vec::new());
        for (j, d) in self.nearest(&x, id) {
            if self.adj[id].iter().any(|&(o, _)| o == j) {
                continue;
            }
            let y = self.nodes[j];
            if self.edge_free(scene, obj, &x, &y) {
                self.edges.push((j.min(id), j.max(id)));
                self.adj[id].push((j, d));
                self.adj[j].push((id, d));
            }
        }
        id
    }

    /// Adds up to `count` free samples, stopping at `deadline`.
    pub fn grow(&mut self, scene: &Scene, obj: &RigidObject, count: usize, deadline: Instant) -> usize {
        let mut added = 0;
        while added < count && Instant::now() < deadline {
            let x = sample_pose(scene, &mut self.rng);
            if self.free(scene, obj, &x) {
                self.add_node(scene, obj, x);
                added += 1;
            }
        }
        added
    }

    /// Connects start and goal and searches; while no path exists, keeps
    /// sampling in batches until `budget` runs out. The roadmap keeps
    /// whatever was added.
    pub fn query(&mut self, scene: &Scene, obj: &RigidObject, start: Pose, goal: Pose, budget: Duration) -> Option<Vec<Pose>> {
        let deadline = Instant::now() + budget;
        if !self.free(scene, obj, &start) || !self.free(scene, obj, &goal) {
            return None;
        }
        let s = self.add_node(scene, obj, start);
        let g = self.add_node(scene, obj, goal);
        let batch = (self.params.n_samples / 10).max(20);
        loop {
            if let Some(path) = self.shortest(s, g) {
                return Some(path.into_iter().map(|i| self.nodes[i]).collect());
            }
            if Instant::now() >= deadline || self.grow(scene, obj, batch, deadline) == 0 {
                return None;
            }
        }
    }

    fn shortest(&self, s: usize, g: usize) -> Option<Vec<usize>> {
        #[derive(PartialEq)]
        struct Item(f64, usize);
        impl Eq for Item {}
        impl Ord for Item {
            fn cmp(&self, o: &Self) -> Ordering {
                o.0.total_cmp(&self.0).then(o.1.cmp(&self.1))
            }
        }
        impl PartialOrd for Item {
            fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
                Some(self.cmp(o))
            }
        }
        let n = self.nodes.len();
        let mut dist = vec![f64::INFINITY; n];
        let mut pred = vec![usize::MAX; n];
        let mut heap = BinaryHeap::from([Item(0.0, s)]);
        dist[s] = 0.0;
        while let Some(Item(c, u)) = heap.pop() {
            if u == g {
                break;
            }
            if c > dist[u] {
                continue;
            }
            for &(v, w) in &self.adj[u] {
                if c + w < dist[v] {
                    dist[v] = c + w;
                    pred[v] = u;
                    heap.push(Item(c + w, v));
                }
            }
        }
        if !dist[g].is_finite() {
            return None;
        }
        let mut path = vec![g];
        while *path.last().unwrap() != s {
            path.push(pred[*path.last().unwrap()]);
        }
        path.reverse();
        Some(path)
    }
}

/// Uniform sampling with k-nearest connections until `n_samples` free
/// nodes exist or the time budget runs out.
pub fn prm_build(scene: &Scene, obj: &RigidObject, params: &PrmParams) -> PrmRoadmap {
    let mut rm = PrmRoadmap {
        nodes: Vec::new(),
        edges: Vec::new(),
        params: params.clone(),
        checks: 0,
        adj: Vec::new(),
        rng: ChaCha8Rng::seed_from_u64(params.seed),
        pieces: body_pieces(obj),
        r_max: obj.max_radius(),
        length: obj.length(),
    };
    let deadline = Instant::now() + params.time_budget;
    rm.grow(scene, obj, params.n_samples, deadline);
    rm
}
