mod common;

use common::{encode, interior, ray_march_depth, Mix};
use proptest::prelude::*;
use surfacegrid::gauss::{eval_function, GaussianComponent, SurfaceFunction};
use surfacegrid::geometry::{frame_from_viewpoint, project_point, render_depth, DepthMap, Viewpoint};
use surfacegrid::FieldGrid;

const TOL: f64 = 2.0 / 65535.0;

fn bump(sigma: f64) -> FieldGrid {
    let c = GaussianComponent::new(256.0, 256.0, sigma, sigma, 0.0, 1).unwrap();
    eval_function(&SurfaceFunction::new(0, vec![c]).unwrap(), 512, 512)
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[test]
fn frame_examples() {
    let f = frame_from_viewpoint(&Viewpoint::new(0.0, 0.0).unwrap());
    assert_eq!((f.view, f.right, f.up), ([1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]));
    let f = frame_from_viewpoint(&Viewpoint::new(90.0, 0.0).unwrap());
    assert_eq!((f.view, f.right, f.up), ([0.0, 1.0, 0.0], [-1.0, 0.0, 0.0], [0.0, 0.0, 1.0]));
}

proptest! {
    #[test]
    fn frames_are_orthonormal(az in 0.0f64..360.0, el in 0.0f64..=90.0) {
        let f = frame_from_viewpoint(&Viewpoint::new(az, el).unwrap());
        for (a, b, want) in [
            (f.view, f.view, 1.0), (f.right, f.right, 1.0), (f.up, f.up, 1.0),
            (f.view, f.right, 0.0), (f.view, f.up, 0.0), (f.right, f.up, 0.0),
        ] {
            prop_assert!((dot(a, b) - want).abs() < 1e-12);
        }
    }

    #[test]
    fn projection_is_affine(az in 0.0f64..360.0, el in 0.0f64..=90.0, s in -300.0f64..300.0) {
        let f = frame_from_viewpoint(&Viewpoint::new(az, el).unwrap());
        let c0 = [256.0, 256.0, 0.0];
        let p = project_point(&f, [c0[0] + s * f.right[0], c0[1] + s * f.right[1], c0[2] + s * f.right[2]]);
        prop_assert!((p.u - (256.0 + s)).abs() < 1e-9);
        prop_assert!((p.v - 256.0).abs() < 1e-9);
        prop_assert!(p.depth.abs() < 1e-9);
    }
}

#[test]
fn projection_examples() {
    let f = frame_from_viewpoint(&Viewpoint::new(30.0, 30.0).unwrap());
    let p = project_point(&f, [256.0, 256.0, 0.0]);
    assert_eq!((p.u, p.v, p.depth), (256.0, 256.0, 0.0));
    let top = frame_from_viewpoint(&Viewpoint::new(0.0, 90.0).unwrap());
    assert_eq!(project_point(&top, [256.0, 256.0, 50.0]).depth, 50.0);
}

#[test]
fn invalid_viewpoints_rejected() {
    assert!(Viewpoint::new(360.0, 30.0).is_err());
    assert!(Viewpoint::new(-1.0, 30.0).is_err());
    assert!(Viewpoint::new(0.0, 90.5).is_err());
    assert!(Viewpoint::with_radius(0.0, 0.0, 30.0).is_err());
}

#[test]
fn flat_top_down_is_uniform_and_fully_covered() {
    let d = render_depth(&FieldGrid::zeros(512, 512), &Viewpoint::new(0.0, 90.0).unwrap());
    assert!(d.values().iter().all(|&v| v == 0.5));
}

#[test]
fn central_bump_matches_ray_march() {
    let field = bump(48.0);
    let (az, el) = (0.0, 30.0);
    let d = render_depth(&field, &Viewpoint::new(az, el).unwrap());
    let vals = d.values();
    let candidates: Vec<(usize, usize)> = (0..512 * 512)
        .map(|k| (k % 512, k / 512))
        .filter(|&(x, y)| interior(vals, 512, 512, x, y, 4.0 / 1024.0))
        .collect();
    let mut rng = Mix(3);
    for _ in 0..100 {
        let (x, y) = candidates[rng.below(candidates.len())];
        let o = ray_march_depth(&field, az, el, x, y).expect("oracle hits the surface");
        assert!((o - vals[y * 512 + x]).abs() <= TOL, "pixel ({x}, {y}): {o} vs {}", vals[y * 512 + x]);
    }
}

#[test]
fn tall_bump_occludes_the_ground_behind_it() {
    let field = bump(24.0);
    let el: f64 = 30.0;
    let d = render_depth(&field, &Viewpoint::new(0.0, el).unwrap());
    // along the centre column the ray would meet the ground plane at
    // t = -sv·cos(φ)/sin(φ); the bump in front must win
    let mut occluded = 0;
    for py in 200..300usize {
        let sv = 256.0 - (py as f64 + 0.5);
        let ground = encode(-sv * el.to_radians().cos() / el.to_radians().sin());
        let got = d.get(256, py as u32);
        if let Some(o) = ray_march_depth(&field, 0.0, el, 256, py) {
            if o > ground + 1e-3 {
                occluded += 1;
                assert!(got > ground, "row {py}: {got} not nearer than ground {ground}");
            }
        }
    }
    assert!(occluded > 50);
}

#[test]
fn output_is_independent_of_thread_count() {
    let mut rng = Mix(9);
    let f = surfacegrid::synth_function(5, rng.below(2000) as u64);
    let field = eval_function(&f, 512, 512);
    let v = Viewpoint::new(60.0, 30.0).unwrap();
    let render = |n: usize| -> DepthMap {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .unwrap()
            .install(|| render_depth(&field, &v))
    };
    assert_eq!(render(1), render(4));
}

#[test]
fn surface_values_respect_encoding_floor() {
    let field = FieldGrid::from_values(512, 512, vec![-5000.0; 512 * 512]).unwrap();
    let d = render_depth(&field, &Viewpoint::new(0.0, 90.0).unwrap());
    assert!(d.values().iter().all(|&v| v == 1.0 / 65535.0));
    assert_eq!(d.quantized().to_u16()[0], 1);
}
