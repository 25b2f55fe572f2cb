//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line on
//! standard output (bypassing the test harness capture) and the test fails if
//! any criterion does.

use std::collections::BTreeMap;
use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use metagen::assembly::{embed_simplex, embed_via_minmax, Isometry, Leaf, PatternOp, StructureIR, Tile};
use metagen::augment::{emit_program, mutate, AugmentError, MutationAxis, MutationConfig};
use metagen::benchkit::{
    build_inverse_tasks, build_reconstruction_tasks, build_understanding_tasks, eval_inverse, eval_reconstruction,
    make_splits, read_jsonl, render_inverse_query, select_active_properties, select_targets, write_jsonl,
    ModelAssets, ReferenceDictionary, SplitSizes, TargetProfile, TaskRecord, TaskType, QUERY_PREFIX,
};
use metagen::cp_core::{
    build_skeleton, check_lift_compat, make_path, make_vertex, resolve_entity, EntityCategory, EntityRef,
    PolytopeKind, SkeletonItem, Vec3, VertexSpec,
};
use metagen::discretize::{parse_obj, voxelize, VoxelGrid, BACKGROUND};
use metagen::frontend::{compile_program, examples, list_params, parse_program, SourceProgram};
use metagen::homogenize::{
    effective_stiffness, extract_properties, homogenize, BaseMaterial, Matrix6, PropertyVector, StiffnessTensor,
    VOID_STIFFNESS_RATIO,
};
use metagen::lifting::{lift_spheres, lift_uniform_beams, lift_varying_beams, LiftedSkeleton, ThicknessProfile};
use metagen::metadb::{grid_frame_program, ingest_model_with, parse_header, write_header, Database, HeaderBlock, IngestOptions};
use metagen::quality::{check_tilable, MAX_RELATIVE_MODULUS};

// Tolerances, as stated by the criteria.
const SOLID_REL_TOL: f64 = 0.01;
const SOLID_MAX_ANISOTROPY: f64 = 1e-3;
const SOLID_TIME_LIMIT: Duration = Duration::from_secs(60);
const LAMINATE_REL_TOL: f64 = 0.05;
const SCHWARZ_TIME_LIMIT: Duration = Duration::from_secs(300);
const FIELD_TOL: f64 = 1e-9;
const FIELD_POINTS: usize = 10_000;
const PAINT_RESOLUTION: usize = 64;
const SLAB_CHAMFER_TOL: f64 = 1e-9;
const SIGMA_BOUND: f64 = 3.0;

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn compile(text: &str) -> StructureIR {
    compile_program(text, &BTreeMap::new()).expect("program compiles")
}

fn sphere_program(r: f64) -> String {
    format!(
        "from metagen import *

def make_structure(r={r:?}) -> Structure:
    v0 = vertex(cuboid.corners.BACK_TOP_RIGHT)
    balls = Spheres(skeleton([v0]), r)
    tile = Tile([balls], cuboid.embed(0.5, 0.5, 0.5, cornerAtAABBMin=cuboid.corners.FRONT_BOTTOM_LEFT))
    return Structure(tile, Identity())
"
    )
}

fn tet_beam_program(d: f64) -> String {
    format!(
        "from metagen import *

def make_structure(d={d:?}) -> Structure:
    v0 = vertex(tet.corners.BOTTOM_LEFT)
    v1 = vertex(tet.edges.TOP_RIGHT, [0.4])
    v2 = vertex(tet.corners.TOP_BACK)
    c0 = Curve([v0, v1, v2])
    beams = UniformBeams(skeleton([c0]), d)
    tile = Tile([beams], tet.embed(0.5))
    return Structure(tile, TetFullMirror())
"
    )
}

/// Isotropic stiffness from Lame constants.
fn isotropic_closed_form(e: f64, nu: f64) -> Matrix6 {
    let lambda = e * nu / ((1.0 + nu) * (1.0 - 2.0 * nu));
    let mu = e / (2.0 * (1.0 + nu));
    Matrix6::from_fn(|i, j| match (i < 3, j < 3) {
        (true, true) if i == j => lambda + 2.0 * mu,
        (true, true) => lambda,
        (false, false) if i == j => mu,
        _ => 0.0,
    })
}

fn criterion_1() -> Outcome {
    let program = sphere_program(1.0);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().map_err(|e| e.to_string())?;
    let start = Instant::now();
    let (tensor, props) = pool.install(|| {
        let grid = voxelize(&compile(&program), 16).unwrap();
        let t = homogenize(&grid, &BaseMaterial::default()).unwrap();
        let p = extract_properties(&t, grid.volume_fraction()).unwrap();
        (t, p)
    });
    let elapsed = start.elapsed();
    let expected = isotropic_closed_form(1.0, 0.45);
    for i in 0..6 {
        for j in 0..6 {
            let (got, want) = (tensor.c[(i, j)], expected[(i, j)]);
            ensure((got - want).abs() <= SOLID_REL_TOL * want.abs().max(1e-12), format!("C{i}{j} = {got}, expected {want}"))?;
        }
    }
    ensure(props.a.abs() < SOLID_MAX_ANISOTROPY, format!("A = {}", props.a))?;
    ensure(props.v == 1.0, format!("V = {}", props.v))?;
    ensure(elapsed < SOLID_TIME_LIMIT, format!("took {elapsed:?}"))?;
    note(&format!(
        "closed form C11 {:.4} C12 {:.4} C44 {:.4}; the quoted 1.8966/1.5517 are half of C11/C12",
        expected[(0, 0)],
        expected[(0, 1)],
        expected[(3, 3)]
    ));
    Ok(format!("C11 {:.4}, C12 {:.4}, C44 {:.4}, A {:.1e}, V 1, {elapsed:.2?}", tensor.c[(0, 0)], tensor.c[(0, 1)], tensor.c[(3, 3)], props.a))
}

fn criterion_2() -> Outcome {
    let r = 32;
    let grid = VoxelGrid::from_fn(r, |_, _, k| k < r / 2);
    let t = effective_stiffness(&grid, &BaseMaterial::default()).map_err(|e| e.to_string())?;
    let solid = isotropic_closed_form(1.0, 0.45);
    let void = isotropic_closed_form(VOID_STIFFNESS_RATIO, 0.45);
    // Normal stiffness acts in series through the layers.
    let reuss_c33 = 2.0 / (1.0 / solid[(2, 2)] + 1.0 / void[(2, 2)]);
    // In-plane, each layer is in plane stress: reduced stiffness E/(1-nu^2), averaged in parallel.
    let q11 = |e: f64| e / (1.0 - 0.45f64 * 0.45);
    let voigt_q11 = 0.5 * (q11(1.0) + q11(VOID_STIFFNESS_RATIO));
    let (c33, c11) = (t.c[(2, 2)], t.c[(0, 0)]);
    ensure(rel(c33, reuss_c33) < LAMINATE_REL_TOL, format!("C33 {c33:.4e} vs series {reuss_c33:.4e}"))?;
    ensure(rel(c11, voigt_q11) < LAMINATE_REL_TOL, format!("C11 {c11:.4} vs parallel {voigt_q11:.4}"))?;
    let s = t.compliance().ok_or("laminate compliance is singular")?;
    let e3 = 1.0 / s[(2, 2)];
    let reuss_e = 2.0 / (1.0 + 1.0 / VOID_STIFFNESS_RATIO);
    let voigt_c11 = 0.5 * (solid[(0, 0)] + void[(0, 0)]);
    note(&format!(
        "naive bounds: E3 {e3:.3e} vs Reuss-of-E {reuss_e:.3e} (ratio {:.2}); C11 {c11:.4} vs Voigt-of-C11 {voigt_c11:.4}",
        e3 / reuss_e
    ));
    Ok(format!("C33 {c33:.4e} vs series {reuss_c33:.4e}, C11 {c11:.4} vs parallel {voigt_q11:.4}"))
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let db = Database::create(dir.path()).map_err(|e| e.to_string())?;
    let opts = IngestOptions { resolution: 32, image_size: 256, ..Default::default() };
    let out = ingest_model_with(&db, examples::SCHWARZ_P, "schwarz_p", &opts).map_err(|e| e.to_string())?;
    let r = &out.report;
    ensure(r.compiled && r.tilable && r.physical, format!("checks: {r:?}"))?;
    let entry = out.entry.ok_or("no entry written")?;
    let mesh = parse_obj(&std::fs::read_to_string(&entry.geometry).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    ensure(mesh.is_closed_manifold(), "exported OBJ is not closed")?;
    let mut fractions = Vec::new();
    for path in &entry.renders {
        let img = image::open(path).map_err(|e| e.to_string())?.to_rgb8();
        let fg = img.pixels().filter(|p| p.0 != BACKGROUND).count();
        fractions.push(fg as f64 / (img.width() * img.height()) as f64);
    }
    ensure(fractions.iter().all(|&f| f > 0.01), format!("blank render: {fractions:?}"))?;
    let props: PropertyVector = serde_json::from_str(&std::fs::read_to_string(&entry.properties).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    // Mirror symmetry of the P surface makes the response cubic.
    ensure(rel(props.e1, props.e2) < 1e-3 && rel(props.e1, props.e3) < 1e-3, format!("E_i {} {} {}", props.e1, props.e2, props.e3))?;
    let elapsed = start.elapsed();
    ensure(elapsed < SCHWARZ_TIME_LIMIT, format!("took {elapsed:?}"))?;
    Ok(format!(
        "all checks pass, closed mesh ({} triangles), render coverage {:.2}..{:.2}, V {:.3}, E {:.4}, {elapsed:.1?}",
        mesh.triangles.len(),
        fractions.iter().cloned().fold(f64::INFINITY, f64::min),
        fractions.iter().cloned().fold(0.0, f64::max),
        props.v,
        props.e
    ))
}

fn random_vertex(rng: &mut ChaCha8Rng, poly: PolytopeKind) -> VertexSpec {
    let cat = [EntityCategory::Corner, EntityCategory::Edge, EntityCategory::Face][rng.gen_range(0..3)];
    let e = EntityRef { polytope: poly, category: cat, index: rng.gen_range(0..poly.entity_count(cat)) };
    let t: Vec<f64> = match cat {
        EntityCategory::Corner => vec![],
        EntityCategory::Edge => vec![rng.gen()],
        EntityCategory::Face if e.corners().len() == 3 => {
            let a: f64 = rng.gen();
            vec![a, rng.gen::<f64>() * (1.0 - a)]
        }
        EntityCategory::Face => vec![rng.gen(), rng.gen()],
    };
    make_vertex(e, (!t.is_empty()).then_some(t.as_slice())).unwrap()
}

fn random_lift(rng: &mut ChaCha8Rng, poly: PolytopeKind) -> LiftedSkeleton {
    if rng.gen_bool(0.25) {
        let items = (0..rng.gen_range(1..4)).map(|_| SkeletonItem::Vertex(random_vertex(rng, poly))).collect();
        return lift_spheres(&build_skeleton(items).unwrap(), rng.gen_range(0.03..0.2)).unwrap();
    }
    let mut items = Vec::new();
    let wanted = rng.gen_range(1..4);
    while items.len() < wanted {
        let smooth = rng.gen_bool(0.3);
        let vs: Vec<VertexSpec> = (0..if smooth { 3 } else { 2 }).map(|_| random_vertex(rng, poly)).collect();
        if let Ok(p) = make_path(vs, smooth) {
            items.push(SkeletonItem::Path(p));
        }
    }
    let skel = build_skeleton(items).unwrap();
    if rng.gen_bool(0.5) {
        lift_uniform_beams(&skel, rng.gen_range(0.02..0.15)).unwrap()
    } else {
        let (a, b) = (rng.gen_range(0.02..0.15), rng.gen_range(0.02..0.15));
        lift_varying_beams(&skel, ThicknessProfile::new(vec![(0.0, a), (0.5, b), (1.0, a)]).unwrap()).unwrap()
    }
}

fn random_mirror_structure(seed: u64) -> StructureIR {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let poly = PolytopeKind::ALL[rng.gen_range(0..3)];
    let sides = [0.5, 0.25];
    let (embedding, pattern) = match poly {
        PolytopeKind::Cuboid => {
            let size = Vec3::from_fn(|_, _| sides[rng.gen_range(0..2)]);
            let min = size.map(|a| if a < 0.5 && rng.gen_bool(0.5) { a } else { 0.0 });
            let corner = PolytopeKind::Cuboid.corner_names()[rng.gen_range(0..8)];
            let corner = resolve_entity(PolytopeKind::Cuboid, EntityCategory::Corner, corner).unwrap();
            (embed_via_minmax(min, min + size, &corner).unwrap(), PatternOp::CuboidFullMirror)
        }
        PolytopeKind::Tet => (embed_simplex(poly, sides[rng.gen_range(0..2)]).unwrap(), PatternOp::TetFullMirror),
        PolytopeKind::TriPrism => (embed_simplex(poly, sides[rng.gen_range(0..2)]).unwrap(), PatternOp::TriPrismFullMirror),
    };
    let lifted = (0..rng.gen_range(1..3)).map(|_| random_lift(&mut rng, poly)).collect();
    StructureIR::new(Tile::new(lifted, embedding).unwrap(), pattern).unwrap()
}

/// Voxels whose centre lies strictly inside more than one, or inside no closed, transformed CP copy.
fn paint_defects(leaf: &Leaf, r: usize) -> (usize, usize) {
    let emb = &leaf.tile.embedding;
    let scale = emb.size().max();
    let inverses: Vec<Isometry> = leaf.transforms.isometries.iter().map(Isometry::inverse).collect();
    (0..r)
        .into_par_iter()
        .map(|k| {
            let (mut over, mut uncovered) = (0, 0);
            for j in 0..r {
                for i in 0..r {
                    let p = Vec3::new(i as f64 + 0.5, j as f64 + 0.5, k as f64 + 0.5) / r as f64;
                    let (mut strict, mut closed) = (0, false);
                    for inv in &inverses {
                        let m = emb.polytope.inside_measure(&emb.to_canonical(&inv.apply(&p))) * scale;
                        strict += usize::from(m < -1e-12);
                        closed |= m <= 1e-12;
                    }
                    over += usize::from(strict > 1);
                    uncovered += usize::from(!closed);
                }
            }
            (over, uncovered)
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1))
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = 0.0f64;
    let mut kinds = BTreeMap::new();
    for seed in 0..20 {
        let ir = random_mirror_structure(1000 + seed);
        let field = ir.compile();
        for _ in 0..FIELD_POINTS {
            let p = Vec3::new(rng.gen(), rng.gen(), rng.gen());
            let d = (field.eval(&p) - field.eval_enumerated(&p)).abs();
            worst = worst.max(d);
            ensure(d < FIELD_TOL, format!("seed {seed}: fold and enumeration differ by {d:e} at {p:?}"))?;
        }
        let StructureIR::Leaf(leaf) = &ir else { return Err("expected a single leaf".into()) };
        let (over, uncovered) = paint_defects(leaf, PAINT_RESOLUTION);
        ensure(over == 0 && uncovered == 0, format!("seed {seed}: {over} overlapping and {uncovered} uncovered voxels"))?;
        *kinds.entry(format!("{:?}", leaf.pattern)).or_insert(0) += 1;
    }
    Ok(format!("20 structures {kinds:?}, max |fold - enumerated| {worst:.1e}, multiplicity 1 on 64^3"))
}

fn criterion_5() -> Outcome {
    let a = VoxelGrid::from_fn(16, |i, j, k| (i * 3 + j * 5 + k * 7) % 4 == 0);
    let same = eval_reconstruction(&a, &a).map_err(|e| e.to_string())?;
    ensure(same.iou == 1.0 && same.chamfer == 0.0, format!("self score {same:?}"))?;
    let lower = VoxelGrid::from_fn(16, |_, _, k| k < 8);
    let upper = VoxelGrid::from_fn(16, |_, _, k| k >= 8);
    let disjoint = eval_reconstruction(&lower, &upper).map_err(|e| e.to_string())?;
    ensure(disjoint.iou == 0.0, format!("disjoint IoU {}", disjoint.iou))?;
    let slab = |k0| VoxelGrid::from_fn(32, move |_, _, k| k == k0);
    let shifted = eval_reconstruction(&slab(12), &slab(13)).map_err(|e| e.to_string())?;
    ensure((shifted.chamfer - 1.0 / 32.0).abs() <= SLAB_CHAMFER_TOL, format!("slab chamfer {}", shifted.chamfer))?;
    Ok(format!("IoU(A,A) 1, CD(A,A) 0, disjoint IoU 0, slab CD {:.12}", shifted.chamfer))
}

fn assets(id: &str, props: PropertyVector) -> ModelAssets {
    ModelAssets {
        id: id.into(),
        source: Some(format!("/models/{id}/model.py")),
        renders: ["top", "front", "right", "angled"].map(|v| Some(format!("/models/{id}/render_{v}.png"))),
        voxels: Some(format!("/benchmark/voxels/{id}.json")),
        code: Some(examples::SCHWARZ_P.into()),
        properties: Some(props),
    }
}

fn criterion_6() -> Outcome {
    let props = extract_properties(&BaseMaterial::default().stiffness(), 1.0).map_err(|e| e.to_string())?;
    let m = assets("m0", props);
    let counts: Vec<usize> = (1..=4).map(|n| build_reconstruction_tasks(&m, n).map(|r| r.len())).collect::<Result<_, _>>().map_err(|e| e.to_string())?;
    ensure(counts == [4, 6, 4, 1], format!("reconstruction counts {counts:?}"))?;
    let understanding = build_understanding_tasks(&m).map_err(|e| e.to_string())?.len();
    ensure(understanding == 2, format!("{understanding} understanding records"))?;
    let reference = ReferenceDictionary::default();
    let inverse = build_inverse_tasks(&m, &reference, &reference.ranges(), 0).map_err(|e| e.to_string())?.len();
    ensure(inverse == 6, format!("{inverse} inverse records"))?;
    let ids: Vec<String> = (0..13_282).map(|i| format!("model_{i:05}")).collect();
    let splits = make_splits(&ids, SplitSizes::proportional(ids.len()), 0).map_err(|e| e.to_string())?;
    ensure(splits.train.len() == 12_732, format!("{} train ids", splits.train.len()))?;
    Ok(format!("4/6/4/1 + 2 + 6 per model; splits {}/{}/{}", splits.train.len(), splits.validate.len(), splits.test.len()))
}

fn simulate(text: &str, r: usize) -> Option<(StiffnessTensor, PropertyVector, VoxelGrid)> {
    let grid = voxelize(&compile_program(text, &BTreeMap::new()).ok()?, r).ok()?;
    let t = homogenize(&grid, &BaseMaterial::default()).ok()?;
    let p = extract_properties(&t, grid.volume_fraction()).ok()?;
    Some((t, p, grid))
}

/// `Write a metagen program that creates a|an <words>.` with no unfilled slots.
fn matches_query_grammar(q: &str) -> bool {
    let Some(rest) = q.strip_prefix(QUERY_PREFIX).and_then(|r| r.strip_prefix(' ')) else { return false };
    let Some(body) = rest.strip_suffix('.') else { return false };
    (body.starts_with("a ") || body.starts_with("an ")) && body.len() > 3 && !body.contains(['{', '}', '\n'])
}

fn criterion_7() -> Outcome {
    let seeds = [
        (sphere_program(0.6), 12),
        (sphere_program(0.75), 12),
        (grid_frame_program(1, 0.12).map_err(|e| e.to_string())?, 16),
        (grid_frame_program(2, 0.1).map_err(|e| e.to_string())?, 16),
        (tet_beam_program(0.12), 16),
    ];
    let materials: Vec<PropertyVector> = seeds.par_iter().filter_map(|(t, r)| simulate(t, *r).map(|s| s.1)).collect();
    ensure(materials.len() == seeds.len(), format!("only {} seed structures simulated", materials.len()))?;
    let reference = ReferenceDictionary::default();
    let ranges = reference.ranges();
    for i in 0..100u64 {
        let props = &materials[i as usize % materials.len()];
        let n = 1 + (i as usize % 6);
        let chosen = select_active_properties(props, &ranges, n, i).map_err(|e| e.to_string())?;
        let profile: TargetProfile = select_targets(props, &chosen, &reference, i).map_err(|e| e.to_string())?;
        let err = eval_inverse(&profile, props, &ranges).map_err(|e| e.to_string())?;
        ensure(err == 0.0, format!("profile {i} scores {err} on its source"))?;
        let q = render_inverse_query(&profile, i);
        ensure(matches_query_grammar(&q), format!("query {i} breaks the grammar: {q}"))?;
    }
    Ok(format!("100 profiles over {} simulated seeds score 0 and match the query grammar", materials.len()))
}

fn mutation_seeds() -> Result<Vec<String>, String> {
    Ok(vec![
        examples::SCHWARZ_P.to_string(),
        examples::PENTAMODE.to_string(),
        grid_frame_program(1, 0.06).map_err(|e| e.to_string())?,
        sphere_program(0.6),
        tet_beam_program(0.06),
    ])
}

const RESEED_STRIDE: u64 = 1_000_003;
const MAX_RESEEDS: u64 = 32;

/// Mutate and re-emit, reseeding when the drawn gates select no site. Returns
/// the program and the enabled axes of every draw, including rejected ones.
fn mutated_program(text: &str, seed: u64) -> Result<(String, Vec<Vec<MutationAxis>>), String> {
    let ir = compile(text);
    let params = list_params(&parse_program(text).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    let mut draws = Vec::new();
    for attempt in 0..MAX_RESEEDS {
        match mutate(&ir, &MutationConfig::with_seed(seed + attempt * RESEED_STRIDE)) {
            Ok((child, trace)) => {
                draws.push(trace.enabled);
                return Ok((emit_program(&child, Some(&params)), draws));
            }
            Err(AugmentError::NoEligibleSites { enabled }) => draws.push(enabled),
            Err(e) => return Err(format!("seed {seed}: {e}")),
        }
    }
    Err(format!("seed {seed}: no site selected after {MAX_RESEEDS} draws"))
}

fn criterion_8() -> Outcome {
    let seeds = mutation_seeds()?;
    let jobs: Vec<(usize, u64)> = (0..200u64).map(|i| ((i % 5) as usize, i)).collect();
    let results: Vec<Result<(String, Vec<Vec<MutationAxis>>), String>> =
        jobs.par_iter().map(|&(s, seed)| mutated_program(&seeds[s], seed)).collect();
    let mut enabled_counts: BTreeMap<String, usize> = BTreeMap::new();
    let mut draws = 0usize;
    for (result, &(s, seed)) in results.iter().zip(&jobs) {
        let (text, gate_draws) = result.clone().map_err(|e| format!("program {s}: {e}"))?;
        let ir = compile_program(&text, &BTreeMap::new()).map_err(|e| format!("program {s} seed {seed}: re-parse failed: {e}"))?;
        for leaf in ir.leaves() {
            for lifted in &leaf.tile.lifted {
                check_lift_compat(&lifted.skeleton, lifted.kind).map_err(|e| format!("program {s} seed {seed}: {e}"))?;
            }
        }
        draws += gate_draws.len();
        for axis in gate_draws.into_iter().flatten() {
            *enabled_counts.entry(format!("{axis:?}")).or_insert(0) += 1;
        }
    }
    let n = draws as f64;
    let mut freq = Vec::new();
    for (axis, p) in [("PathKind", 0.7), ("LiftKind", 0.7), ("Vertex", 0.9), ("Thickness", 0.98)] {
        let f = *enabled_counts.get(axis).unwrap_or(&0) as f64 / n;
        let bound = SIGMA_BOUND * (p * (1.0 - p) / n).sqrt();
        ensure((f - p).abs() <= bound, format!("{axis} gate frequency {f} vs {p} (3 sigma {bound:.3})"))?;
        freq.push(format!("{axis} {f:.3}"));
    }
    for &(s, seed) in jobs.iter().step_by(10) {
        let again = mutated_program(&seeds[s], seed)?.0;
        ensure(Ok(&again) == results[(seed) as usize].as_ref().map(|r| &r.0), format!("seed {seed} is not reproducible"))?;
    }
    Ok(format!("200 mutations re-emit and re-parse; gates over {draws} draws {}; reruns byte-identical", freq.join(", ")))
}

/// Voigt and Reuss bulk and shear moduli from the tensor.
fn vrh_bounds(t: &StiffnessTensor) -> Option<(f64, f64, f64, f64)> {
    let c = &t.c;
    let s = t.compliance()?;
    let k_v = ((c[(0, 0)] + c[(1, 1)] + c[(2, 2)]) + 2.0 * (c[(0, 1)] + c[(0, 2)] + c[(1, 2)])) / 9.0;
    let g_v = ((c[(0, 0)] + c[(1, 1)] + c[(2, 2)]) - (c[(0, 1)] + c[(0, 2)] + c[(1, 2)]) + 3.0 * (c[(3, 3)] + c[(4, 4)] + c[(5, 5)])) / 15.0;
    let k_r = 1.0 / ((s[(0, 0)] + s[(1, 1)] + s[(2, 2)]) + 2.0 * (s[(0, 1)] + s[(0, 2)] + s[(1, 2)]));
    let g_r = 15.0 / (4.0 * (s[(0, 0)] + s[(1, 1)] + s[(2, 2)]) - 4.0 * (s[(0, 1)] + s[(0, 2)] + s[(1, 2)]) + 3.0 * (s[(3, 3)] + s[(4, 4)] + s[(5, 5)]));
    Some((k_v, k_r, g_v, g_r))
}

fn criterion_9() -> Outcome {
    let parents = [
        (sphere_program(0.6), 12),
        (grid_frame_program(1, 0.12).map_err(|e| e.to_string())?, 16),
        (grid_frame_program(2, 0.1).map_err(|e| e.to_string())?, 16),
        (tet_beam_program(0.12), 16),
    ];
    let candidates: Vec<(usize, u64)> = (0..120u64).map(|i| ((i % 4) as usize, 500 + i)).collect();
    let simulated: Vec<Option<(StiffnessTensor, PropertyVector)>> = candidates
        .par_iter()
        .map(|&(p, seed)| {
            let (text, _) = mutated_program(&parents[p].0, seed).ok()?;
            let (t, props, grid) = simulate(&text, parents[p].1)?;
            check_tilable(&grid).0.then_some((t, props))
        })
        .collect();
    let valid: Vec<&(StiffnessTensor, PropertyVector)> = simulated.iter().flatten().take(20).collect();
    ensure(valid.len() == 20, format!("only {} valid mutated structures", valid.len()))?;
    let mut max_e: f64 = 0.0;
    for (i, (t, props)) in valid.iter().enumerate() {
        ensure(props.e <= MAX_RELATIVE_MODULUS, format!("structure {i}: E = {}", props.e))?;
        let (k_v, k_r, g_v, g_r) = vrh_bounds(t).ok_or("singular compliance")?;
        let slack = 1e-9 * k_v.abs().max(g_v.abs());
        ensure(k_r <= k_v + slack && g_r <= g_v + slack, format!("structure {i}: K_R {k_r} K_V {k_v} G_R {g_r} G_V {g_v}"))?;
        max_e = max_e.max(props.e);
    }
    Ok(format!("20 valid mutated structures, max E {max_e:.4}, Reuss <= Voigt for K and G"))
}

fn synthetic_record(rng: &mut ChaCha8Rng, i: usize) -> TaskRecord {
    let task_type = [TaskType::Reconstruction, TaskType::MaterialUnderstanding, TaskType::InverseDesign][i % 3];
    let mut data = serde_json::Map::new();
    data.insert("index".into(), i.into());
    data.insert("value".into(), serde_json::json!(rng.gen::<f64>() * 10f64.powi(rng.gen_range(-8..8))));
    data.insert("text".into(), format!("line one\nline \"two\" {}", rng.gen::<u32>()).into());
    TaskRecord {
        task_type,
        label: format!("m{i}:{}:{}", task_type.name(), rng.gen::<u16>()),
        source: rng.gen_bool(0.8).then(|| format!("/models/m{i}/model.py")),
        data,
        query: format!("query {i} with unicode \u{3bd} and tabs\t"),
        response: rng.gen_bool(0.7).then(|| format!("```python\nprint({i})\n```")),
    }
}

fn criterion_10() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let records: Vec<TaskRecord> = (0..1000).map(|i| synthetic_record(&mut rng, i)).collect();
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = dir.path().join("records.jsonl");
    write_jsonl(&records, &path).map_err(|e| e.to_string())?;
    ensure(read_jsonl(&path).map_err(|e| e.to_string())? == records, "JSONL round trip changed records")?;

    let headers = [
        "sources:\n  /literature/a.pdf: seed paper\n  /models/m1/model.py: parent\nfile_info:\n  generator_info:\n    script: /generators/grid_frame\n    arguments: {k_subdiv: 2, beam_d: 0.06}\n    structure_details: {cell_size: 0.25}\n",
        "title: frame\ntags: [beam, cubic]\nrevision: 3\nratio: 0.125\n",
    ];
    for h in headers {
        let text = format!("'''\n{h}'''\n{}", examples::PENTAMODE);
        let (parsed, body) = parse_header(&text).map_err(|e| e.to_string())?;
        let rewritten = format!("{}{}", write_header(&parsed), body);
        let (again, body2) = parse_header(&rewritten).map_err(|e| e.to_string())?;
        ensure(again.parsed == parsed.parsed && body2 == body, "header round trip changed the block")?;
        ensure(write_header(&HeaderBlock::from_mapping(again.parsed)) == write_header(&parsed), "header text is not stable")?;
    }

    let mut worst = 0.0f64;
    for (name, text) in [("schwarz_p", examples::SCHWARZ_P), ("pentamode", examples::PENTAMODE)] {
        let ir = compile(text);
        let params = list_params(&parse_program(text).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        let emitted = emit_program(&ir, Some(&params));
        ensure(SourceProgram::new(&emitted).header.is_none(), "emitted program gained a header")?;
        let back = compile_program(&emitted, &BTreeMap::new()).map_err(|e| format!("{name}: {e}"))?;
        let (f, g) = (ir.compile(), back.compile());
        for _ in 0..FIELD_POINTS {
            let p = Vec3::new(rng.gen(), rng.gen(), rng.gen());
            let d = (f.eval(&p) - g.eval(&p)).abs();
            worst = worst.max(d);
            ensure(d < FIELD_TOL, format!("{name}: emitted field differs by {d:e} at {p:?}"))?;
        }
    }
    Ok(format!("1000 JSONL records, 2 headers, emitted examples agree to {worst:.1e}"))
}

fn note(line: &str) {
    let _ = writeln!(std::io::stdout(), "    note: {line}");
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("solid-cube homogenization", criterion_1),
        ("laminate bounds", criterion_2),
        ("Schwarz P end to end", criterion_3),
        ("pattern oracle", criterion_4),
        ("metric identities", criterion_5),
        ("task-count arithmetic", criterion_6),
        ("inverse-design soundness", criterion_7),
        ("mutation determinism and validity", criterion_8),
        ("physical gate", criterion_9),
        ("round trips", criterion_10),
    ];
    let mut failed = Vec::new();
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_else(|| "panicked".into()))
        });
        let (status, detail) = match &outcome {
            Ok(d) => ("PASS", d.clone()),
            Err(e) => ("FAIL", e.clone()),
        };
        let _ = writeln!(std::io::stdout(), "criterion {:>2} {status}: {name}: {detail} [{:.1?}]", i + 1, start.elapsed());
        if outcome.is_err() {
            failed.push(i + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
