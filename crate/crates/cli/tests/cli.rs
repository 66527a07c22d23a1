use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use polytraverse::bench::validate_plan;
use polytraverse::io::{self, RoadmapFile};
use polytraverse::RotationTable;

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_polytraverse")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn field(out: &str, key: &str) -> f64 {
    out.lines()
        .find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix(' ')))
        .unwrap_or_else(|| panic!("no `{key}` in {out}"))
        .trim()
        .parse()
        .unwrap()
}

fn p(x: &Path) -> &str {
    x.to_str().unwrap()
}

/// Decomposes the corner scene and builds the stick into it.
fn corner_roadmap(dir: &Path) -> PathBuf {
    let rmap = dir.join("corner.rmap");
    let o = run(&["decompose", p(&data("corner.scene")), "-o", p(&rmap), "--seed", "1", "--n-v", "256"]);
    assert_eq!(code(&o), 0, "{o:?}");
    assert!(field(&stdout(&o), "coverage") >= 0.95);
    let o = run(&["build", p(&rmap), p(&data("stick.obj")), "--n-t", "48"]);
    assert_eq!(code(&o), 0, "{o:?}");
    rmap
}

#[test]
fn corner_workflow() {
    let dir = tempfile::tempdir().unwrap();
    let rmap = corner_roadmap(dir.path());
    let plan = dir.path().join("stick.plan");
    let o = run(&[
        "plan",
        p(&rmap),
        "--scene",
        p(&data("corner.scene")),
        "--object",
        p(&data("stick.obj")),
        "--start",
        "1,1,0",
        "--goal",
        "7,7,3",
        "-o",
        p(&plan),
    ]);
    assert_eq!(code(&o), 0, "{o:?}");
    let out = stdout(&o);
    assert!(field(&out, "online_ms") >= 0.0);
    let (mp, dim, n_r) = io::read_plan(&plan).unwrap();
    assert_eq!(field(&out, "waypoints") as usize, mp.waypoints().len());
    let scene = io::read_scene(&data("corner.scene")).unwrap();
    let obj = io::read_object(&data("stick.obj")).unwrap();
    let table = RotationTable::for_dim(dim, n_r).unwrap();
    assert!(validate_plan(&mp, &scene, &obj, &table, 32, 1e-6).pass);

    let svg = dir.path().join("corner.svg");
    let o = run(&[
        "render",
        p(&data("corner.scene")),
        "--roadmap",
        p(&rmap),
        "--plan",
        p(&plan),
        "--object",
        p(&data("stick.obj")),
        "-o",
        p(&svg),
    ]);
    assert_eq!(code(&o), 0, "{o:?}");
    let text = std::fs::read_to_string(&svg).unwrap();
    let rm = RoadmapFile::read(&rmap).unwrap();
    assert_eq!(text.matches(r#"class="sweep""#).count(), mp.segments.len());
    assert_eq!(text.matches(r#"class="obstacle""#).count(), 1);
    assert_eq!(text.matches(r#"class="cover""#).count(), rm.coarse.polytopes.len());
    assert_eq!(text.matches(r#"class="adjacency""#).count(), rm.coarse.edges.len());
}

#[test]
fn second_object_reuses_the_cover() {
    let dir = tempfile::tempdir().unwrap();
    let rmap = corner_roadmap(dir.path());
    let before = RoadmapFile::read(&rmap).unwrap();
    let o = run(&["build", p(&rmap), p(&data("l.obj")), "--n-t", "48", "-v"]);
    assert_eq!(code(&o), 0, "{o:?}");
    assert!(!String::from_utf8_lossy(&o.stderr).contains("decompos"));
    let after = RoadmapFile::read(&rmap).unwrap();
    assert_eq!(after.coarse, before.coarse);
    assert_eq!(after.objects.len(), 2);
    let o = run(&["info", p(&rmap)]);
    assert_eq!(code(&o), 0);
    assert_eq!(field(&stdout(&o), "objects"), 2.0);
}

#[test]
fn decompose_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.rmap"), dir.path().join("b.rmap"));
    for x in [&a, &b] {
        assert_eq!(
            code(&run(&["decompose", p(&data("corner.scene")), "-o", p(x), "--seed", "7", "--n-v", "128"])),
            0
        );
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn query_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let rmap = corner_roadmap(dir.path());
    let out = dir.path().join("q.plan");
    let plan = |start: &str, goal: &str| {
        run(&[
            "plan",
            p(&rmap),
            "--scene",
            p(&data("corner.scene")),
            "--object",
            p(&data("stick.obj")),
            "--start",
            start,
            "--goal",
            goal,
            "-o",
            p(&out),
        ])
    };
    assert_eq!(code(&plan("3,3,0", "7,7,3")), 5);
    assert_eq!(code(&plan("1,1,0", "1,1,99")), 5);
    let o = plan("1,1,0", "1,1,0");
    assert_eq!(code(&o), 0);
    assert_eq!(field(&stdout(&o), "waypoints"), 0.0);
    assert_eq!(io::read_plan(&out).unwrap().0.segments.len(), 0);
}

#[test]
fn walled_off_goal_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let scene = dir.path().join("split.scene");
    std::fs::write(
        &scene,
        "version = 1\ndim = 2\nlo = [0.0, 0.0]\nhi = [8.0, 4.0]\n\n[[obstacle]]\nlo = [3.8, 0.0]\nhi = [4.2, 4.0]\n",
    )
    .unwrap();
    let rmap = dir.path().join("split.rmap");
    assert_eq!(code(&run(&["decompose", p(&scene), "-o", p(&rmap), "--n-v", "128"])), 0);
    assert_eq!(code(&run(&["build", p(&rmap), p(&data("stick.obj"))])), 0);
    let o = run(&[
        "plan",
        p(&rmap),
        "--scene",
        p(&scene),
        "--object",
        p(&data("stick.obj")),
        "--start",
        "1,2,0",
        "--goal",
        "7,2,0",
        "-o",
        p(&dir.path().join("x.plan")),
    ]);
    assert_eq!(code(&o), 4, "{o:?}");
}

#[test]
fn file_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.scene");
    std::fs::write(&bad, "version = 1\ndim = 2\nlo = [0.0, 0.0]\nhi = [8.0 8.0]\n").unwrap();
    let o = run(&["decompose", p(&bad), "-o", p(&dir.path().join("x.rmap"))]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 4, column"), "{o:?}");

    let rmap = corner_roadmap(dir.path());
    let mut bytes = std::fs::read(&rmap).unwrap();
    bytes[4] = 99;
    let newer = dir.path().join("newer.rmap");
    std::fs::write(&newer, bytes).unwrap();
    let o = run(&["info", p(&newer)]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("unsupported roadmap version 99"));

    let o = run(&["bench", "--object", p(&dir.path().join("missing.obj"))]);
    assert_eq!(code(&o), 1);
}

#[test]
fn fingerprint_collision_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let rmap = corner_roadmap(dir.path());
    let mut rm = RoadmapFile::read(&rmap).unwrap();
    rm.objects[0].geometry[0] ^= 1;
    rm.write(&rmap).unwrap();
    let o = run(&["build", p(&rmap), p(&data("stick.obj"))]);
    assert_eq!(code(&o), 3, "{o:?}");
}

#[test]
fn empty_cover_builds_an_empty_graph() {
    let dir = tempfile::tempdir().unwrap();
    let scene = dir.path().join("open.scene");
    std::fs::write(&scene, "version = 1\ndim = 2\nlo = [0.0, 0.0]\nhi = [4.0, 4.0]\n").unwrap();
    let rmap = dir.path().join("open.rmap");
    assert_eq!(code(&run(&["decompose", p(&scene), "-o", p(&rmap)])), 0);
    let o = run(&["build", p(&rmap), p(&data("stick.obj"))]);
    assert_eq!(code(&o), 0, "{o:?}");
    assert_eq!(field(&stdout(&o), "patches"), 0.0);
    assert!(String::from_utf8_lossy(&o.stderr).contains("no overlapping polytopes"));
}

#[test]
fn spatial_scene_renders_a_mesh() {
    let dir = tempfile::tempdir().unwrap();
    let mesh = dir.path().join("slab.mesh");
    assert_eq!(code(&run(&["render", p(&data("slab.scene")), "-o", p(&mesh)])), 0);
    let text = std::fs::read_to_string(&mesh).unwrap();
    assert_eq!(text.lines().filter(|l| *l == "g obstacle").count(), 4);
    assert!(text.lines().filter(|l| l.starts_with("t ")).all(|l| l.split_whitespace().count() == 10));
}

#[test]
fn bench_single_factor() {
    let dir = tempfile::tempdir().unwrap();
    let results = dir.path().join("results.toml");
    let o = run(&[
        "bench",
        "--factors",
        "1.0",
        "--shrink",
        "none",
        "--trials",
        "1",
        "--prm-samples",
        "200",
        "-o",
        p(&results),
    ]);
    assert_eq!(code(&o), 0, "{o:?}");
    assert_eq!(stdout(&o).lines().count(), 2, "{}", stdout(&o));
    assert!(std::fs::read_to_string(&results).unwrap().contains("variant"));
}

#[test]
fn data_files_match_the_fixtures() {
    use polytraverse::bench::fixtures;
    assert_eq!(io::read_object(&data("stick.obj")).unwrap(), fixtures::stick());
    assert_eq!(io::read_object(&data("l.obj")).unwrap(), fixtures::l_object().unwrap());
    assert_eq!(io::read_object(&data("pad.obj")).unwrap(), fixtures::pad());
    let s = io::read_scene(&data("corner.scene")).unwrap();
    assert_eq!(io::format_scene(&s), io::format_scene(&fixtures::corner_scene().unwrap()));
}
