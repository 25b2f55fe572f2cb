use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::assembly::structure_field;
use crate::cp_core::{check_lift_compat, LiftKind, SkeletonItem, Vec3};
use crate::frontend::examples::{PENTAMODE, SCHWARZ_P};
use crate::frontend::{compile_program, list_params, parse_program, SourceProgram};
use crate::lifting::Thickness;
use crate::quality::check_compiles;
use crate::test_fixtures::{centered_sphere, cube_frame};

fn schwarz() -> crate::assembly::StructureIR {
    compile_program(SCHWARZ_P, &BTreeMap::new()).unwrap()
}

fn only(axis_p: [f64; 4], seed: u64) -> MutationConfig {
    MutationConfig { p_swap_pathkind: axis_p[0], p_swap_lift: axis_p[1], p_vertex: axis_p[2], p_thickness: axis_p[3], seed }
}

fn random_points(n: usize) -> Vec<Vec3> {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    (0..n).map(|_| Vec3::new(rng.gen(), rng.gen(), rng.gen())).collect()
}

#[test]
fn schwarz_lift_swap_goes_to_mixed_minimal() {
    let ir = schwarz();
    let leaf = ir.leaves()[0];
    assert_eq!(
        lift_candidates(&leaf.tile.lifted[0].skeleton, LiftKind::UniformTPMSShellViaConjugation),
        vec![LiftKind::UniformTPMSShellViaMixedMinimal]
    );
    let (out, trace) = mutate(&ir, &only([0.0, 1.0, 0.0, 0.0], 5)).unwrap();
    assert_eq!(out.leaves()[0].tile.lifted[0].kind, LiftKind::UniformTPMSShellViaMixedMinimal);
    assert_eq!(trace.enabled, vec![MutationAxis::LiftKind]);
    assert_eq!(trace.applied.len(), 1);
    assert_eq!(trace.applied[0].old, "UniformTPMSShellViaConjugation");
}

#[test]
fn zero_probabilities_have_no_sites() {
    let err = mutate(&schwarz(), &only([0.0; 4], 1)).unwrap_err();
    assert_eq!(err, AugmentError::NoEligibleSites { enabled: vec![] });
    let bad = MutationConfig { p_vertex: 1.5, ..Default::default() };
    assert!(matches!(mutate(&schwarz(), &bad), Err(AugmentError::InvalidProbability { name: "p_vertex", .. })));
}

#[test]
fn mutation_is_deterministic_and_type_valid() {
    let ir = schwarz();
    let cfg = only([1.0, 0.0, 1.0, 1.0], 11);
    let (a, ta) = mutate(&ir, &cfg).unwrap();
    let (b, tb) = mutate(&ir, &cfg).unwrap();
    assert_eq!(ta, tb);
    assert_eq!(emit_program(&a, None), emit_program(&b, None));
    for leaf in a.leaves() {
        for l in &leaf.tile.lifted {
            check_lift_compat(&l.skeleton, l.kind).unwrap();
            for v in &l.skeleton.nodes {
                let sum: f64 = v.weights.values().iter().sum();
                assert!((sum - 1.0).abs() < 1e-12);
                assert!(v.weights.support().iter().all(|c| v.entity.corners().contains(c)));
            }
            let Thickness::Uniform(t) = l.thickness else { panic!() };
            assert!(t > 0.0 && t <= MAX_THICKNESS && (0.015..=0.045).contains(&t));
        }
    }
    assert!(ta.applied.iter().any(|r| r.axis == MutationAxis::PathKind && r.new == "Polyline"));
}

#[test]
fn beam_mutations_stay_in_family() {
    let ir = cube_frame(0.5, 0.1);
    for seed in 0..10 {
        match mutate(&ir, &MutationConfig::with_seed(seed)) {
            Ok((out, trace)) => {
                let l = &out.leaves()[0].tile.lifted[0];
                assert!(matches!(l.kind, LiftKind::UniformBeams | LiftKind::SpatiallyVaryingBeams));
                assert!(l.thickness.scalar() <= MAX_THICKNESS);
                // corners are never moved
                assert!(trace.applied.iter().all(|r| r.axis != MutationAxis::Vertex));
            }
            Err(AugmentError::NoEligibleSites { .. }) => {}
            Err(e) => panic!("{e}"),
        }
    }
}

#[test]
fn gate_frequencies_match_configuration() {
    let ir = schwarz();
    let cfg = MutationConfig::default();
    let n = 200.0;
    let mut gate_counts = [0.0; 4];
    let mut vertex_sites = (0.0f64, 0.0f64);
    for seed in 0..200 {
        let trace = plan_mutation(&ir, &MutationConfig { seed, ..cfg }).unwrap();
        for (k, axis) in MutationAxis::ALL.iter().enumerate() {
            if trace.enabled.contains(axis) {
                gate_counts[k] += 1.0;
            }
        }
        if trace.enabled.contains(&MutationAxis::Vertex) {
            vertex_sites.0 += 4.0;
            vertex_sites.1 += trace.applied.iter().filter(|r| r.axis == MutationAxis::Vertex).count() as f64;
        }
    }
    let probs = [cfg.p_swap_pathkind, cfg.p_swap_lift, cfg.p_vertex, cfg.p_thickness];
    for (count, p) in gate_counts.iter().zip(probs) {
        let sigma = (n * p * (1.0 - p)).sqrt();
        assert!((count - n * p).abs() <= 3.0 * sigma + 1e-9, "{count} vs {}", n * p);
    }
    let (sites, hits) = vertex_sites;
    let sigma = (sites * 0.9 * 0.1).sqrt();
    assert!((hits - 0.9 * sites).abs() <= 3.0 * sigma);
}

#[test]
fn emitted_schwarz_reproduces_the_field() {
    let ir = schwarz();
    let params = list_params(&parse_program(SCHWARZ_P).unwrap()).unwrap();
    let text = emit_program(&ir, Some(&params));
    assert!(text.contains("def make_structure(shell_thickness=0.03) -> Structure:"), "{text}");
    let back = compile_program(&text, &BTreeMap::new()).unwrap();
    let (fa, fb) = (ir.compile(), back.compile());
    for p in random_points(10_000) {
        assert!((fa.eval(&p) - fb.eval(&p)).abs() <= 1e-9);
    }
    assert!(check_compiles(&SourceProgram::new(&text)).0);
}

#[test]
fn emitted_pentamode_reproduces_the_field() {
    let ir = compile_program(PENTAMODE, &BTreeMap::new()).unwrap();
    let text = emit_program(&ir, None);
    assert!(text.contains("embed_via_minmax") || text.contains(".embed("), "{text}");
    let back = compile_program(&text, &BTreeMap::new()).unwrap();
    for p in random_points(2_000) {
        assert!((structure_field(&ir, &p) - structure_field(&back, &p)).abs() <= 1e-9);
    }
}

#[test]
fn minimal_program_is_short() {
    let text = emit_program(&centered_sphere(0.2), None);
    let statements = text.lines().skip(3).filter(|l| !l.trim().is_empty()).count();
    assert!(statements <= 12, "{text}");
    assert!(text.contains("v0 = vertex(cuboid.corners.BACK_TOP_RIGHT)"));
    for name in ["skel = ", "tile = ", "pat = Identity()", "obj = Structure(tile, pat)", "return obj"] {
        assert!(text.contains(name), "{name} in {text}");
    }
}

#[test]
fn mutate_emit_chain_is_deterministic() {
    let ir = schwarz();
    let cfg = only([1.0, 0.0, 1.0, 1.0], 3);
    let run = || {
        let (m, _) = mutate(&ir, &cfg).unwrap();
        let text = emit_program(&m, None);
        let again = compile_program(&text, &BTreeMap::new()).unwrap();
        (text, emit_program(&again, None))
    };
    let (a1, a2) = run();
    let (b1, b2) = run();
    assert_eq!(a1, b1);
    assert_eq!(a1, a2);
    assert_eq!(a2, b2);
}

#[test]
fn mutated_paths_keep_their_vertices() {
    let ir = schwarz();
    let (out, _) = mutate(&ir, &only([1.0, 0.0, 0.0, 0.0], 0)).unwrap();
    let SkeletonItem::Path(before) = &ir.leaves()[0].tile.lifted[0].skeleton.items[0] else { panic!() };
    let SkeletonItem::Path(after) = &out.leaves()[0].tile.lifted[0].skeleton.items[0] else { panic!() };
    assert_eq!(before.vertices, after.vertices);
    assert_ne!(before.smooth, after.smooth);
}

#[test]
fn hybrid_prompt_layout() {
    let a = "def make_structure():\n    return A\n";
    let b = "def make_structure():\n    return B\n";
    let prompt = build_hybrid_prompt(a, b, "API TEXT");
    assert!(prompt.lines().any(|l| l == "I want you to help discover unique new programs. Do this by genetic crossover based on these parent Metagen DSL programs:"));
    assert!(prompt.contains("I want you to help discover unique new programs."));
    assert!(prompt.starts_with("You have access to a DSL whose specification is as follows:\nAPI TEXT\n"));
    let (ia, ib) = (prompt.find("return A").unwrap(), prompt.find("return B").unwrap());
    assert!(ia < ib);
    assert!(prompt.contains("1)\n```python\ndef make_structure():\n    return A\n```"));
    assert!(prompt.contains("2)\n```python\ndef make_structure():\n    return B\n```"));
    assert!(prompt.trim_end().ends_with("Return only the resulting code in a single code block."));
    assert_eq!(prompt.matches("```").count(), 4);
    assert_eq!(prompt, build_hybrid_prompt(a, b, "API TEXT"));
}
