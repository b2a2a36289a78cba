mod common;

use std::collections::BTreeSet;
use std::f64::consts::PI;

use midair_core::geom::vec3;
use midair_core::{
    apply_pose_delta, contains, node_aabb, set_operator, signed_distance, CsgNode, OpKind, Pose,
    PoseDelta, Primitive, PrimitiveId, Rotation, Scene, Shape, Vec3,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const BAND: f64 = 1e-9;

fn sign_agreement(scene: &Scene, points: &[Vec3]) -> (usize, usize) {
    let mut checked = 0;
    let mut bad = 0;
    for p in points {
        let d = signed_distance(scene, &scene.root, p);
        if d.abs() <= BAND {
            continue;
        }
        checked += 1;
        if (d < 0.0) != contains(scene, &scene.root, p) {
            bad += 1;
        }
    }
    (checked, bad)
}

#[test]
fn fixture_signs_agree_with_membership() {
    for (i, scene) in common::fixture_scenes().iter().enumerate() {
        let points =
            common::sample_points(&node_aabb(scene, &scene.root), 0.2, 10_000, 7 + i as u64);
        let (checked, bad) = sign_agreement(scene, &points);
        assert!(
            checked > 9_900,
            "{}: only {checked} points off the surface",
            scene.name
        );
        assert_eq!(bad, 0, "{}", scene.name);
    }
}

#[test]
fn random_scene_signs_agree_with_membership() {
    for seed in 0..50 {
        let scene = common::random_scene(seed);
        let bounds = scene
            .primitives
            .values()
            .map(midair_core::sdf::primitive_aabb)
            .fold(midair_core::Aabb::empty(), |a, b| a.union(&b));
        let (_, bad) = sign_agreement(&scene, &common::sample_points(&bounds, 0.1, 2_000, seed));
        assert_eq!(bad, 0, "seed {seed}");
    }
}

fn pair(kind: OpKind, a: Primitive, b: Primitive, swap: bool) -> Scene {
    let (l, r) = if swap {
        (b.id.as_str().to_string(), a.id.as_str().to_string())
    } else {
        (a.id.as_str().to_string(), b.id.as_str().to_string())
    };
    Scene::new(
        "",
        [a, b],
        CsgNode::op("n", kind, vec![CsgNode::leaf(l), CsgNode::leaf(r)]),
    )
    .unwrap()
}

fn box_and_sphere() -> (Primitive, Primitive) {
    (
        Primitive::new(
            "a",
            Shape::Box {
                half_extents: Vec3::repeat(1.0),
            },
            Pose::default(),
        ),
        Primitive::new(
            "b",
            Shape::Sphere { radius: 1.2 },
            Pose::at(vec3(0.5, 0.0, 0.0)),
        ),
    )
}

#[test]
fn union_is_symmetric_in_sign() {
    let (a, b) = box_and_sphere();
    let ab = pair(OpKind::Union, a.clone(), b.clone(), false);
    let ba = pair(OpKind::Union, a, b, true);
    for p in common::sample_points(&node_aabb(&ab, &ab.root), 0.3, 5_000, 1) {
        let d1 = signed_distance(&ab, &ab.root, &p);
        let d2 = signed_distance(&ba, &ba.root, &p);
        assert_eq!(d1 < 0.0, d2 < 0.0);
    }
}

#[test]
fn difference_is_asymmetric() {
    let (a, b) = box_and_sphere();
    let ab = pair(OpKind::Difference, a.clone(), b.clone(), false);
    let ba = pair(OpKind::Difference, a, b, true);
    let bounds = node_aabb(&ab, &ab.root).union(&node_aabb(&ba, &ba.root));
    let differ = common::sample_points(&bounds, 0.3, 5_000, 2)
        .iter()
        .filter(|p| contains(&ab, &ab.root, p) != contains(&ba, &ba.root, p))
        .count();
    assert!(differ > 0);
}

/// Distance from `p` to the ellipsoid x²/a² + y²/b² + z²/c² = 1 by dense
/// sampling of the surface; accurate to well under 1e-2 for the radii used.
fn ellipsoid_distance(axes: &Vec3, p: &Vec3) -> f64 {
    let n = 400;
    let mut best = f64::INFINITY;
    for i in 0..=n {
        let theta = PI * i as f64 / n as f64;
        for j in 0..2 * n {
            let phi = PI * j as f64 / n as f64;
            let s = vec3(
                axes.x * theta.sin() * phi.cos(),
                axes.y * theta.sin() * phi.sin(),
                axes.z * theta.cos(),
            );
            best = best.min((s - p).norm());
        }
    }
    best
}

#[test]
fn anisotropic_sphere_distance_is_conservative() {
    let axes = vec3(2.0, 1.0, 0.5);
    let scene = Scene::new(
        "",
        [Primitive::new(
            "e",
            Shape::Sphere { radius: 1.0 },
            Pose {
                scale: axes,
                ..Pose::default()
            },
        )],
        CsgNode::leaf("e"),
    )
    .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..40 {
        let p = vec3(
            rng.random_range(-3.0..3.0),
            rng.random_range(-2.0..2.0),
            rng.random_range(-1.5..1.5),
        );
        let d = signed_distance(&scene, &scene.root, &p);
        let truth = ellipsoid_distance(&axes, &p);
        // the sampled surface overestimates the true distance by at most ~1e-2
        assert!(d.abs() <= truth + 1e-9, "{p:?}: |{d}| > {truth}");
    }
}

#[test]
fn rigid_deltas_preserve_center_distances() {
    let scene = common::scene("table");
    let ids: BTreeSet<PrimitiveId> = scene.primitives.keys().cloned().collect();
    let centers = |s: &Scene| {
        s.primitives
            .values()
            .map(|p| p.pose.translation)
            .collect::<Vec<_>>()
    };
    let before = centers(&scene);
    let deltas = [
        PoseDelta::Translate(vec3(0.3, -1.0, 2.5)),
        PoseDelta::RotateAbout {
            axis: vec3(1.0, 2.0, -0.5),
            angle: 1.234,
            pivot: vec3(0.1, 0.2, 0.3),
        },
    ];
    for delta in deltas {
        let after = centers(&apply_pose_delta(&scene, &ids, &delta).unwrap());
        for i in 0..before.len() {
            for j in 0..before.len() {
                let d0 = (before[i] - before[j]).norm();
                let d1 = (after[i] - after[j]).norm();
                assert!((d0 - d1).abs() < 1e-9);
            }
        }
    }
}

#[test]
fn quarter_turn_maps_local_x_to_minus_z() {
    let scene = common::scene("bracket");
    let id = PrimitiveId::new("base");
    let pivot = scene.primitive(&id).unwrap().pose.translation;
    let delta = PoseDelta::RotateAbout {
        axis: Vec3::y(),
        angle: PI / 2.0,
        pivot,
    };
    let out = apply_pose_delta(&scene, &BTreeSet::from([id.clone()]), &delta).unwrap();
    let rot: &Rotation = &out.primitive(&id).unwrap().pose.rotation;
    assert!((rot.rotate(&Vec3::x()) - vec3(0.0, 0.0, -1.0)).norm() < 1e-9);
}

#[test]
fn group_scale_doubles_x_separation() {
    let scene = common::scene("bracket");
    let ids: BTreeSet<PrimitiveId> = ["cube", "post"]
        .iter()
        .map(|s| PrimitiveId::new(*s))
        .collect();
    let dx = |s: &Scene| {
        s.primitive(&PrimitiveId::new("post"))
            .unwrap()
            .pose
            .translation
            .x
            - s.primitive(&PrimitiveId::new("cube"))
                .unwrap()
                .pose
                .translation
                .x
    };
    let out = apply_pose_delta(
        &scene,
        &ids,
        &PoseDelta::ScaleAxes {
            factors: vec3(2.0, 1.0, 1.0),
            pivot: vec3(0.1, 0.5, 0.0),
        },
    )
    .unwrap();
    assert!((dx(&out) - 2.0 * dx(&scene)).abs() < 1e-12);
}

#[test]
fn interior_points_lie_inside_aabb() {
    let mut scenes = common::fixture_scenes();
    scenes.extend((100..120).map(common::random_scene));
    for scene in &scenes {
        let bounds = node_aabb(scene, &scene.root);
        let wide = scene
            .primitives
            .values()
            .map(midair_core::sdf::primitive_aabb)
            .fold(midair_core::Aabb::empty(), |a, b| a.union(&b));
        for p in common::sample_points(&wide, 0.1, 5_000, 11) {
            if contains(scene, &scene.root, &p) {
                assert!(bounds.contains(&p), "{}: {p:?}", scene.name);
            }
        }
    }
}

#[test]
fn rebracketed_difference_matches_membership() {
    let prims = [
        Primitive::new(
            "a",
            Shape::Box {
                half_extents: vec3(1.0, 0.8, 0.6),
            },
            Pose::default(),
        ),
        Primitive::new(
            "b",
            Shape::Sphere { radius: 0.7 },
            Pose::at(vec3(0.8, 0.0, 0.0)),
        ),
        Primitive::new(
            "c",
            Shape::Cylinder {
                radius: 0.3,
                height: 3.0,
            },
            Pose::at(vec3(-0.5, 0.0, 0.2)),
        ),
    ];
    let scene = Scene::new(
        "",
        prims,
        CsgNode::op(
            "u",
            OpKind::Union,
            vec![CsgNode::leaf("a"), CsgNode::leaf("b"), CsgNode::leaf("c")],
        ),
    )
    .unwrap();
    let out = set_operator(&scene, "u", OpKind::Difference).unwrap();
    let prim = |id: &str| scene.primitive(&PrimitiveId::new(id)).unwrap();
    for p in common::sample_points(&node_aabb(&scene, &scene.root), 0.2, 1_000, 5) {
        let inside = |id: &str| midair_core::sdf::primitive_contains(prim(id), &p);
        let expected = inside("a") && !(inside("b") || inside("c"));
        assert_eq!(contains(&out, &out.root, &p), expected);
    }
}

#[test]
fn union_to_difference_keeps_order() {
    let scene = common::scene("bracket");
    let out = set_operator(&scene, "tower", OpKind::Difference).unwrap();
    assert_eq!(
        out.find_node("tower").unwrap(),
        &CsgNode::op(
            "tower",
            OpKind::Difference,
            vec![CsgNode::leaf("cube"), CsgNode::leaf("ball")]
        )
    );
    assert_eq!(set_operator(&scene, "tower", OpKind::Union).unwrap(), scene);
}
