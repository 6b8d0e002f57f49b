use std::f64::consts::PI;

use fermi_ee::asymptotics::{i_value, trace_sweep};
use fermi_ee::counterexample::{build_envelope, sequence_from_envelope, zigzag_prism, DecayProfile};
use fermi_ee::reduction::{landau_levels, predict_entropy_3d, predict_trace_3d, reduced_trace, ReductionOptions};
use fermi_ee::regions::{Region3D, Sampler, TriangleMesh};
use fermi_ee::spectral::GridPolicy;
use fermi_ee::{IntervalUnion, SymbolFunction};

#[test]
fn cube_reduction_is_a_stack_of_identical_sections() {
    // every section of the unit cube is (0,1), so the reduced trace is the
    // 1D trace times L²(B/2π) per level
    let cfg = landau_levels(1.0, 6.0).unwrap();
    let f = SymbolFunction::linear_minus_square();
    let l = 8.0;
    let r = reduced_trace(&Region3D::unit_cube(), &cfg, &f, l, &Sampler::Grid { n: 5 }, &ReductionOptions::default())
        .unwrap();
    assert_eq!(r.unique_problems, cfg.nu as usize);
    let unit = IntervalUnion::single(0.0, 1.0).unwrap();
    let expected: f64 = cfg
        .mu_levels
        .iter()
        .map(|&mu| trace_sweep(&unit, mu, &f, &[l], &GridPolicy::default()).unwrap()[0].trace)
        .sum::<f64>()
        * l
        * l
        * cfg.b
        / (2.0 * PI);
    assert!((r.value - expected).abs() < 1e-12 * expected, "{} vs {expected}", r.value);
}

#[test]
fn entropy_prediction_agrees_with_generic_symbol_path() {
    let cfg = landau_levels(1.0, 5.5).unwrap();
    let ball = Region3D::unit_ball();
    for g in [0.5, 1.0, 2.0] {
        let f = SymbolFunction::renyi(g).unwrap();
        let a = predict_entropy_3d(&ball, &cfg, g, 20.0).unwrap();
        let b = predict_trace_3d(&ball, &cfg, &f, 20.0).unwrap();
        assert!((a.log_coefficient - b.log_coefficient).abs() < 1e-12);
        assert!(b.volume_term.abs() < 1e-12);
        assert!((i_value(&f).unwrap() - (1.0 + g) / (24.0 * g)).abs() < 1e-14);
    }
}

#[test]
fn zigzag_mesh_export_round_trips() {
    let env = build_envelope(|t| DecayProfile::InverseLog.eval(t), 1e3, 400).unwrap();
    let prism = zigzag_prism(&sequence_from_envelope(&env, 12).unwrap()).unwrap();
    let mesh = TriangleMesh::parse(&prism.to_mesh().unwrap().to_text()).unwrap();
    assert!((mesh.volume() - prism.volume()).abs() < 1e-9);
    assert!((mesh.perpendicular_area() - 6.0).abs() < 1e-9);
    let region = Region3D::Mesh(mesh);
    let e = region.counting_integral(&Sampler::MonteCarlo { samples: 40_000, seed: 3 }).unwrap();
    assert!(e.agrees_with(6.0, 3.0), "{e:?}");
}

#[test]
fn reduction_is_reproducible_across_calls() {
    let cfg = landau_levels(1.0, 3.0).unwrap();
    let f = SymbolFunction::renyi(1.0).unwrap();
    let s = Sampler::MonteCarlo { samples: 48, seed: 11 };
    let a = reduced_trace(&Region3D::unit_ball(), &cfg, &f, 4.0, &s, &ReductionOptions::default()).unwrap();
    let b = reduced_trace(&Region3D::unit_ball(), &cfg, &f, 4.0, &s, &ReductionOptions::default()).unwrap();
    assert_eq!(a.value.to_bits(), b.value.to_bits());
    assert_eq!(a.std_error.to_bits(), b.std_error.to_bits());
}
