//! File formats: scenes and plans as TOML, objects as an obj-like line
//! format, roadmaps as a versioned little-endian binary.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::decompose::{CoarseGraph, DecomposeParams};
use crate::densegraph::{BuildStats, ConfigPatch, DenseEdge, DenseGraph, DenseParams, Grouping, Motion, PairRecord, PairStatus};
use crate::error::{Error, Result};
use crate::geometry::{Configuration, ConvexPolytope, RigidObject, Scene, Vec3};
use crate::query::{MotionPlan, PlanSegment, SegmentTag};

pub const SCENE_VERSION: u32 = 1;
pub const PLAN_VERSION: u32 = 1;
pub const ROADMAP_VERSION: u32 = 1;
const MAGIC: &[u8; 4] = b"RMAP";

fn toml_error(text: &str, e: &toml::de::Error) -> Error {
    let (line, col) = match e.span() {
        Some(span) => {
            let before = &text[..span.start.min(text.len())];
            let line = before.matches('\n').count() + 1;
            let col = before.len() - before.rfind('\n').map(|i| i + 1).unwrap_or(0) + 1;
            (line, col)
        }
        None => (0, 0),
    };
    Error::Parse(format!("line {line}, column {col}: {}", e.message()))
}

fn vec_of(xs: &[f64], dim: usize, what: &str) -> Result<Vec3> {
    if xs.len() != dim {
        return Err(Error::Parse(format!("{what}: expected {dim} coordinates, got {}", xs.len())));
    }
    let mut v = Vec3::zeros();
    for (k, x) in xs.iter().enumerate() {
        v[k] = *x;
    }
    Ok(v)
}

fn coords(v: &Vec3, dim: usize) -> Vec<f64> {
    (0..dim).map(|k| v[k]).collect()
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SceneDoc {
    version: u32,
    dim: usize,
    lo: Vec<f64>,
    hi: Vec<f64>,
    #[serde(default, rename = "obstacle")]
    obstacles: Vec<ObstacleDoc>,
}

/// One of: `lo`/`hi` box, `hull` points, or half-space `rows` with `b`.
#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ObstacleDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lo: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    hi: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    hull: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    rows: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    b: Option<Vec<f64>>,
}

pub fn parse_scene(text: &str) -> Result<Scene> {
    let doc: SceneDoc = toml::from_str(text).map_err(|e| toml_error(text, &e))?;
    if doc.version != SCENE_VERSION {
        return Err(Error::UnsupportedVersion(doc.version));
    }
    let dim = doc.dim;
    if dim != 2 && dim != 3 {
        return Err(Error::Parse(format!("dim must be 2 or 3, got {dim}")));
    }
    let mut obstacles = Vec::new();
    for (i, o) in doc.obstacles.iter().enumerate() {
        let what = format!("obstacle {}", i + 1);
        let p = match (&o.lo, &o.hi, &o.hull, &o.rows, &o.b) {
            (Some(lo), Some(hi), None, None, None) => ConvexPolytope::from_box(vec_of(lo, dim, &what)?, vec_of(hi, dim, &what)?, dim)?,
            (None, None, Some(pts), None, None) => {
                let pts = pts.iter().map(|x| vec_of(x, dim, &what)).collect::<Result<Vec<_>>>()?;
                ConvexPolytope::from_points(dim, &pts)?
            }
            (None, None, None, Some(rows), Some(b)) => {
                let rows = rows.iter().map(|x| vec_of(x, dim, &what)).collect::<Result<Vec<_>>>()?;
                ConvexPolytope::new(dim, rows, b.clone())?
            }
            _ => return Err(Error::Parse(format!("{what}: give exactly one of lo/hi, hull, or rows/b"))),
        };
        obstacles.push(p);
    }
    Scene::new(dim, vec_of(&doc.lo, dim, "lo")?, vec_of(&doc.hi, dim, "hi")?, obstacles)
}

/// Obstacles are written as half-space rows, so parsing the output
/// reproduces the scene exactly.
pub fn format_scene(scene: &Scene) -> String {
    let dim = scene.dim;
    let doc = SceneDoc {
        version: SCENE_VERSION,
        dim,
        lo: coords(&scene.lo, dim),
        hi: coords(&scene.hi, dim),
        obstacles: scene
            .obstacles
            .iter()
            .map(|o| ObstacleDoc {
                rows: Some(o.rows().iter().map(|r| coords(r, dim)).collect()),
                b: Some(o.offsets().to_vec()),
                ..ObstacleDoc::default()
            })
            .collect(),
    };
    toml::to_string(&doc).expect("scene serializes")
}

fn read_text(path: &Path) -> Result<String> {
    Ok(std::fs::read_to_string(path)?)
}

pub fn read_scene(path: &Path) -> Result<Scene> {
    parse_scene(&read_text(path)?)
}

/// Object text: `d <dim>`, `v x y [z]`, `e i j`, `f i j k`, optional
/// `c x y [z]`; indices are 1-based; `#` starts a comment. A 2D object with
/// vertices but no edges is read as a closed polygon in vertex order.
pub fn parse_object(text: &str) -> Result<RigidObject> {
    let mut dim = None;
    let mut verts = Vec::new();
    let mut edges = Vec::new();
    let mut faces = Vec::new();
    let mut center = None;
    for (ln, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |m: &str| Error::Parse(format!("line {}, column 1: {m}", ln + 1));
        let mut it = line.split_whitespace();
        let tag = it.next().expect("nonempty line");
        let rest: Vec<&str> = it.collect();
        let nums = || -> Result<Vec<f64>> { rest.iter().map(|t| t.parse::<f64>().map_err(|_| err(&format!("bad number `{t}`")))).collect() };
        let idx = |n: usize| -> Result<Vec<usize>> {
            if rest.len() != n {
                return Err(err(&format!("`{tag}` needs {n} indices")));
            }
            rest.iter()
                .map(|t| match t.parse::<usize>() {
                    Ok(i) if i >= 1 => Ok(i - 1),
                    _ => Err(err(&format!("bad index `{t}`"))),
                })
                .collect()
        };
        match tag {
            "d" => match rest.as_slice() {
                ["2"] => dim = Some(2),
                ["3"] => dim = Some(3),
                _ => return Err(err("`d` must be 2 or 3")),
            },
            "v" | "c" => {
                let x = nums()?;
                if x.len() < 2 || x.len() > 3 {
                    return Err(err("expected 2 or 3 coordinates"));
                }
                let p = Vec3::new(x[0], x[1], x.get(2).copied().unwrap_or(0.0));
                if tag == "v" {
                    verts.push(p);
                } else {
                    center = Some(p);
                }
            }
            "e" => {
                let i = idx(2)?;
                edges.push((i[0], i[1]));
            }
            "f" => {
                let i = idx(3)?;
                faces.push([i[0], i[1], i[2]]);
            }
            _ => return Err(err(&format!("unknown record `{tag}`"))),
        }
    }
    let dim = dim.unwrap_or(if faces.is_empty() { 2 } else { 3 });
    if dim == 2 && edges.is_empty() && verts.len() > 2 {
        return RigidObject::polygon(verts, center);
    }
    if dim == 2 && edges.is_empty() && verts.len() == 2 {
        edges.push((0, 1));
    }
    let c = center.unwrap_or_else(|| crate::geometry::centroid(&verts));
    RigidObject::new(dim, verts, edges, faces, c)
}

pub fn format_object(obj: &RigidObject) -> String {
    let mut out = format!("d {}\n", obj.dim());
    let dim = obj.dim();
    for v in obj.vertices() {
        let c: Vec<String> = coords(v, dim).iter().map(|x| x.to_string()).collect();
        out.push_str(&format!("v {}\n", c.join(" ")));
    }
    for &(a, b) in obj.edges() {
        out.push_str(&format!("e {} {}\n", a + 1, b + 1));
    }
    for f in obj.faces() {
        out.push_str(&format!("f {} {} {}\n", f[0] + 1, f[1] + 1, f[2] + 1));
    }
    out.push_str(&format!("c {}\n", vec![0.0.to_string(); dim].join(" ")));
    out
}

pub fn read_object(path: &Path) -> Result<RigidObject> {
    parse_object(&read_text(path)?)
}

/// SHA-256 of the object's canonical vertex list.
pub fn fingerprint(obj: &RigidObject) -> [u8; 32] {
    Sha256::digest(obj.canonical_bytes()).into()
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PlanDoc {
    version: u32,
    dim: usize,
    n_r: usize,
    total: f64,
    #[serde(default, rename = "waypoint")]
    waypoints: Vec<WaypointDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WaypointDoc {
    p: Vec<f64>,
    rot: usize,
    segment: usize,
    tag: String,
}

/// Every segment lists all its waypoints, so junctions appear twice.
pub fn format_plan(plan: &MotionPlan, dim: usize, n_r: usize) -> String {
    let mut waypoints = Vec::new();
    for (i, s) in plan.segments.iter().enumerate() {
        let tag = match s.tag {
            SegmentTag::InterVertex => "inter",
            SegmentTag::IntraVertex => "intra",
        };
        for q in &s.waypoints {
            waypoints.push(WaypointDoc {
                p: coords(&q.p, dim),
                rot: q.rot,
                segment: i,
                tag: tag.into(),
            });
        }
    }
    let doc = PlanDoc {
        version: PLAN_VERSION,
        dim,
        n_r,
        total: plan.total,
        waypoints,
    };
    toml::to_string(&doc).expect("plan serializes")
}

/// Returns the plan with its dimension and table size.
pub fn parse_plan(text: &str) -> Result<(MotionPlan, usize, usize)> {
    let doc: PlanDoc = toml::from_str(text).map_err(|e| toml_error(text, &e))?;
    if doc.version != PLAN_VERSION {
        return Err(Error::UnsupportedVersion(doc.version));
    }
    let mut segments: Vec<PlanSegment> = Vec::new();
    for w in &doc.waypoints {
        let tag = match w.tag.as_str() {
            "inter" => SegmentTag::InterVertex,
            "intra" => SegmentTag::IntraVertex,
            t => return Err(Error::Parse(format!("unknown segment tag `{t}`"))),
        };
        let q = Configuration::new(vec_of(&w.p, doc.dim, "waypoint")?, w.rot);
        if w.segment == segments.len() {
            segments.push(PlanSegment { tag, waypoints: Vec::new() });
        } else if w.segment + 1 != segments.len() {
            return Err(Error::Parse("waypoints must be grouped by ascending segment".into()));
        }
        segments.last_mut().expect("pushed").waypoints.push(q);
    }
    Ok((MotionPlan { segments, total: doc.total }, doc.dim, doc.n_r))
}

pub fn write_plan(path: &Path, plan: &MotionPlan, dim: usize, n_r: usize) -> Result<()> {
    Ok(std::fs::write(path, format_plan(plan, dim, n_r))?)
}

pub fn read_plan(path: &Path) -> Result<(MotionPlan, usize, usize)> {
    parse_plan(&read_text(path)?)
}

/// Dense graph stored for one object, keyed by its fingerprint.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectEntry {
    pub fingerprint: [u8; 32],
    /// Canonical vertex bytes, kept to tell a genuine match from a collision.
    pub geometry: Vec<u8>,
    pub dense: DenseGraph,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoadmapFile {
    pub decompose: DecomposeParams,
    pub coverage: f64,
    pub coarse: CoarseGraph,
    pub objects: Vec<ObjectEntry>,
}

impl RoadmapFile {
    pub fn new(coarse: CoarseGraph, decompose: DecomposeParams, coverage: f64) -> Self {
        Self {
            decompose,
            coverage,
            coarse,
            objects: Vec::new(),
        }
    }

    /// Dense graph for `obj`. A stored entry with the same fingerprint but
    /// different geometry is refused.
    pub fn dense_for(&self, obj: &RigidObject) -> Result<Option<&DenseGraph>> {
        let fp = fingerprint(obj);
        match self.objects.iter().find(|e| e.fingerprint == fp) {
            Some(e) if e.geometry != obj.canonical_bytes() => Err(Error::FingerprintCollision),
            Some(e) => Ok(Some(&e.dense)),
            None => Ok(None),
        }
    }

    /// Adds or replaces the dense graph of `obj`.
    pub fn insert_dense(&mut self, obj: &RigidObject, dense: DenseGraph) -> Result<()> {
        let fp = fingerprint(obj);
        let geometry = obj.canonical_bytes();
        if let Some(e) = self.objects.iter_mut().find(|e| e.fingerprint == fp) {
            if e.geometry != geometry {
                return Err(Error::FingerprintCollision);
            }
            e.dense = dense;
            return Ok(());
        }
        self.objects.push(ObjectEntry {
            fingerprint: fp,
            geometry,
            dense,
        });
        self.objects.sort_by(|a, b| a.fingerprint.cmp(&b.fingerprint));
        Ok(())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&ROADMAP_VERSION.to_le_bytes());
        let mut params = Writer::default();
        write_decompose(&mut params, &self.decompose);
        params.f64(self.coverage);
        section(&mut out, &params.0);
        let mut coarse = Writer::default();
        write_coarse(&mut coarse, &self.coarse);
        section(&mut out, &coarse.0);
        out.extend_from_slice(&(self.objects.len() as u32).to_le_bytes());
        for e in &self.objects {
            let mut w = Writer::default();
            w.0.extend_from_slice(&e.fingerprint);
            w.bytes(&e.geometry);
            write_dense(&mut w, &e.dense);
            section(&mut out, &w.0);
        }
        out
    }

    pub fn from_bytes(data: &[u8]) -> Result<Self> {
        let mut r = Reader { data, pos: 0 };
        if r.take(4)? != MAGIC {
            return Err(Error::Parse("not a roadmap file (bad magic)".into()));
        }
        let version = r.u32()?;
        if version != ROADMAP_VERSION {
            return Err(Error::UnsupportedVersion(version));
        }
        let mut p = r.section()?;
        let decompose = read_decompose(&mut p)?;
        let coverage = p.f64()?;
        p.finish()?;
        let mut c = r.section()?;
        let coarse = read_coarse(&mut c)?;
        c.finish()?;
        let n = r.u32()? as usize;
        let mut objects = Vec::with_capacity(n.min(1024));
        for _ in 0..n {
            let mut s = r.section()?;
            let fingerprint: [u8; 32] = s.take(32)?.try_into().expect("32 bytes");
            let geometry = s.bytes()?;
            let dense = read_dense(&mut s)?;
            s.finish()?;
            objects.push(ObjectEntry { fingerprint, geometry, dense });
        }
        r.finish()?;
        Ok(Self {
            decompose,
            coverage,
            coarse,
            objects,
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        Ok(std::fs::write(path, self.to_bytes())?)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_bytes(&std::fs::read(path)?)
    }
}

fn section(out: &mut Vec<u8>, body: &[u8]) {
    out.extend_from_slice(&(body.len() as u64).to_le_bytes());
    out.extend_from_slice(body);
}

#[derive(Default)]
struct Writer(Vec<u8>);

impl Writer {
    fn u8(&mut self, x: u8) {
        self.0.push(x);
    }
    fn u32(&mut self, x: u32) {
        self.0.extend_from_slice(&x.to_le_bytes());
    }
    fn u64(&mut self, x: u64) {
        self.0.extend_from_slice(&x.to_le_bytes());
    }
    fn len(&mut self, x: usize) {
        self.u64(x as u64);
    }
    fn f64(&mut self, x: f64) {
        self.0.extend_from_slice(&x.to_le_bytes());
    }
    fn vec3(&mut self, v: &Vec3) {
        for k in 0..3 {
            self.f64(v[k]);
        }
    }
    fn bytes(&mut self, b: &[u8]) {
        self.len(b.len());
        self.0.extend_from_slice(b);
    }
}

struct Reader<'a> {
    data: &'a [u8],
    pos: usize,
}

fn truncated() -> Error {
    Error::Parse("roadmap file is truncated or corrupt".into())
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.data.len()).ok_or_else(truncated)?;
        let s = &self.data[self.pos..end];
        self.pos = end;
        Ok(s)
    }
    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
    fn len(&mut self) -> Result<usize> {
        let n = self.u64()?;
        // Every counted item takes at least one byte.
        if n > (self.data.len() - self.pos) as u64 {
            return Err(truncated());
        }
        Ok(n as usize)
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
    fn vec3(&mut self) -> Result<Vec3> {
        Ok(Vec3::new(self.f64()?, self.f64()?, self.f64()?))
    }
    fn bytes(&mut self) -> Result<Vec<u8>> {
        let n = self.len()?;
        Ok(self.take(n)?.to_vec())
    }
    fn section(&mut self) -> Result<Reader<'a>> {
        let n = self.len()?;
        Ok(Reader { data: self.take(n)?, pos: 0 })
    }
    fn finish(&self) -> Result<()> {
        if self.pos == self.data.len() {
            Ok(())
        } else {
            Err(Error::Parse("trailing bytes in roadmap section".into()))
        }
    }
}

fn write_decompose(w: &mut Writer, p: &DecomposeParams) {
    w.len(p.n_v);
    w.len(p.n_s);
    w.f64(p.alpha);
    w.u64(p.seed);
    match p.radius {
        Some(r) => {
            w.u8(1);
            w.f64(r);
        }
        None => w.u8(0),
    }
    w.len(p.max_iterations);
}

fn read_decompose(r: &mut Reader) -> Result<DecomposeParams> {
    Ok(DecomposeParams {
        n_v: r.u64()? as usize,
        n_s: r.u64()? as usize,
        alpha: r.f64()?,
        seed: r.u64()?,
        radius: match r.u8()? {
            0 => None,
            _ => Some(r.f64()?),
        },
        max_iterations: r.u64()? as usize,
    })
}

fn write_poly(w: &mut Writer, p: &ConvexPolytope) {
    w.u8(p.dim() as u8);
    w.u8(p.is_empty() as u8);
    w.len(p.n_rows());
    for (a, b) in p.rows().iter().zip(p.offsets()) {
        w.vec3(a);
        w.f64(*b);
    }
}

fn read_poly(r: &mut Reader) -> Result<ConvexPolytope> {
    let dim = r.u8()? as usize;
    let empty = r.u8()? != 0;
    let n = r.len()?;
    let mut a = Vec::with_capacity(n);
    let mut b = Vec::with_capacity(n);
    for _ in 0..n {
        a.push(r.vec3()?);
        b.push(r.f64()?);
    }
    ConvexPolytope::from_raw(dim, a, b, empty)
}

fn write_coarse(w: &mut Writer, g: &CoarseGraph) {
    w.u8(g.dim as u8);
    w.len(g.polytopes.len());
    for p in &g.polytopes {
        write_poly(w, p);
    }
    w.len(g.edges.len());
    for (&(i, j), p) in g.edges.iter().zip(&g.intersections) {
        w.len(i);
        w.len(j);
        write_poly(w, p);
    }
}

fn read_coarse(r: &mut Reader) -> Result<CoarseGraph> {
    let dim = r.u8()? as usize;
    let n = r.len()?;
    let polytopes = (0..n).map(|_| read_poly(r)).collect::<Result<Vec<_>>>()?;
    let m = r.len()?;
    let mut edges = Vec::with_capacity(m);
    let mut intersections = Vec::with_capacity(m);
    for _ in 0..m {
        let (i, j) = (r.len_index(n)?, r.len_index(n)?);
        edges.push((i, j));
        intersections.push(read_poly(r)?);
    }
    Ok(CoarseGraph {
        dim,
        polytopes,
        edges,
        intersections,
    })
}

impl Reader<'_> {
    fn len_index(&mut self, bound: usize) -> Result<usize> {
        let i = self.u64()?;
        if i >= bound as u64 {
            return Err(Error::Parse(format!("index {i} out of range in roadmap file")));
        }
        Ok(i as usize)
    }
}

fn write_config(w: &mut Writer, q: &Configuration) {
    w.vec3(&q.p);
    w.u32(q.rot as u32);
}

fn read_config(r: &mut Reader) -> Result<Configuration> {
    Ok(Configuration::new(r.vec3()?, r.u32()? as usize))
}

fn write_dense_params(w: &mut Writer, p: &DenseParams) {
    w.len(p.n_r);
    w.len(p.n_t);
    match p.h {
        Some(h) => {
            w.u8(1);
            w.f64(h);
        }
        None => w.u8(0),
    }
    w.len(p.n_waypoints);
    w.u8(p.retry as u8);
    w.len(p.n_divisions);
    w.f64(p.eps);
    w.f64(p.dtheta_max);
    w.len(p.node_limit);
    w.u8(p.optimal as u8);
    w.len(p.max_side_configs);
    w.len(p.lattice);
    w.u8(match p.grouping {
        Grouping::Swept => 0,
        Grouping::None => 1,
    });
}

fn read_dense_params(r: &mut Reader) -> Result<DenseParams> {
    Ok(DenseParams {
        n_r: r.u64()? as usize,
        n_t: r.u64()? as usize,
        h: match r.u8()? {
            0 => None,
            _ => Some(r.f64()?),
        },
        n_waypoints: r.u64()? as usize,
        retry: r.u8()? != 0,
        n_divisions: r.u64()? as usize,
        eps: r.f64()?,
        dtheta_max: r.f64()?,
        node_limit: r.u64()? as usize,
        optimal: r.u8()? != 0,
        max_side_configs: r.u64()? as usize,
        lattice: r.u64()? as usize,
        grouping: match r.u8()? {
            0 => Grouping::Swept,
            1 => Grouping::None,
            g => return Err(Error::Parse(format!("unknown grouping tag {g}"))),
        },
    })
}

fn status_tag(s: PairStatus) -> u8 {
    match s {
        PairStatus::Certified => 0,
        PairStatus::Infeasible => 1,
        PairStatus::Unverified => 2,
        PairStatus::Pruned => 3,
    }
}

fn write_dense(w: &mut Writer, g: &DenseGraph) {
    w.u8(g.dim as u8);
    write_dense_params(w, &g.params);
    w.len(g.patches.len());
    for p in &g.patches {
        w.len(p.edge.0);
        w.len(p.edge.1);
        w.len(p.index);
        w.len(p.configs.len());
        for q in &p.configs {
            write_config(w, q);
        }
        w.len(p.adjacency.len());
        for &(a, b) in &p.adjacency {
            w.len(a);
            w.len(b);
        }
    }
    w.len(g.edges.len());
    for e in &g.edges {
        w.len(e.u);
        w.len(e.w);
        w.len(e.motion.u_index);
        w.len(e.motion.w_index);
        w.f64(e.motion.cost);
        w.len(e.motion.waypoints.len());
        for q in &e.motion.waypoints {
            write_config(w, q);
        }
        w.len(e.polys.len());
        for &i in &e.polys {
            w.len(i);
        }
    }
    w.len(g.pairs.len());
    for p in &g.pairs {
        w.len(p.u);
        w.len(p.w);
        w.u8(status_tag(p.status));
        w.len(p.n_waypoints);
    }
    let s = &g.stats;
    for x in [s.milp_count, s.direct_count, s.bnb_count, s.certified, s.infeasible, s.unverified, s.pruned] {
        w.len(x);
    }
}

fn read_dense(r: &mut Reader) -> Result<DenseGraph> {
    let dim = r.u8()? as usize;
    let params = read_dense_params(r)?;
    let n = r.len()?;
    let mut patches = Vec::with_capacity(n);
    for _ in 0..n {
        let edge = (r.u64()? as usize, r.u64()? as usize);
        let index = r.u64()? as usize;
        let nc = r.len()?;
        let configs = (0..nc).map(|_| read_config(r)).collect::<Result<Vec<_>>>()?;
        let na = r.len()?;
        let adjacency = (0..na).map(|_| Ok((r.len_index(nc)?, r.len_index(nc)?))).collect::<Result<Vec<_>>>()?;
        patches.push(ConfigPatch {
            edge,
            index,
            configs,
            adjacency,
        });
    }
    let m = r.len()?;
    let mut edges = Vec::with_capacity(m);
    for _ in 0..m {
        let u = r.len_index(n)?;
        let w = r.len_index(n)?;
        let u_index = r.len_index(patches[u].configs.len())?;
        let w_index = r.len_index(patches[w].configs.len())?;
        let cost = r.f64()?;
        let nw = r.len()?;
        let waypoints = (0..nw).map(|_| read_config(r)).collect::<Result<Vec<_>>>()?;
        let np = r.len()?;
        let polys = (0..np).map(|_| Ok(r.u64()? as usize)).collect::<Result<Vec<_>>>()?;
        edges.push(DenseEdge {
            u,
            w,
            motion: Motion {
                waypoints,
                u_index,
                w_index,
                cost,
            },
            polys,
        });
    }
    let k = r.len()?;
    let mut pairs = Vec::with_capacity(k);
    for _ in 0..k {
        let u = r.u64()? as usize;
        let w = r.u64()? as usize;
        let status = match r.u8()? {
            0 => PairStatus::Certified,
            1 => PairStatus::Infeasible,
            2 => PairStatus::Unverified,
            3 => PairStatus::Pruned,
            t => return Err(Error::Parse(format!("unknown pair status {t}"))),
        };
        pairs.push(PairRecord {
            u,
            w,
            status,
            n_waypoints: r.u64()? as usize,
        });
    }
    let mut s = [0usize; 7];
    for x in &mut s {
        *x = r.u64()? as usize;
    }
    Ok(DenseGraph {
        dim,
        params,
        patches,
        edges,
        pairs,
        stats: BuildStats {
            milp_count: s[0],
            direct_count: s[1],
            bnb_count: s[2],
            certified: s[3],
            infeasible: s[4],
            unverified: s[5],
            pruned: s[6],
        },
    })
}
