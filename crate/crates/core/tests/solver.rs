mod common;

use pesc::io::{parse_trace_csv, write_trace_csv};
use pesc::{
    convolve_full, deconvolve, degrade, trace_to_rows, Cost, CostKind, DegradationSpec,
    EpigraphConfig, EpigraphMethod, Error, Image, Kernel, MeasurementModel, SolverConfig,
};

fn blurred_scene(bsnr: f64, seed: u64) -> (Image, Image, Kernel) {
    let orig = common::scene();
    let spec = DegradationSpec {
        kernel: Kernel::boxcar(3).unwrap(),
        target_bsnr_db: bsnr,
        seed,
    };
    let (z, _) = degrade(&orig, &spec).unwrap();
    (orig, z, spec.kernel)
}

#[test]
fn delta_kernel_keeps_constant_image() {
    let z = Image::filled(12, 9, 77.0).unwrap();
    let (out, trace) = deconvolve(&z, &Kernel::delta(), &SolverConfig::default(), None).unwrap();
    assert!(out.dist_sq(&z).sqrt() < 1e-9);
    assert_eq!(trace.outer.len(), 10);
    assert!(trace.outer.iter().all(|r| r.isnr_db.is_none()));
}

#[test]
fn noiseless_constant_is_recovered() {
    // zero padding makes the blurred border darker, so recovery is a limit
    let orig = Image::filled(16, 16, 50.0).unwrap();
    let h = Kernel::boxcar(3).unwrap();
    let z = convolve_full(&orig, &h);
    let cfg = SolverConfig {
        outer_iters: 100,
        epigraph: EpigraphConfig {
            method: EpigraphMethod::CuttingPlane,
            ..EpigraphConfig::default()
        },
        ..SolverConfig::default()
    };
    let (out, _) = deconvolve(&z, &h, &cfg, None).unwrap();
    let model = MeasurementModel::hyperplanes(z, h).unwrap();
    assert!(out.dist_sq(&orig).sqrt() < 1e-9);
    assert!(model.residual_norm(&out).unwrap() < 1e-9);
    assert!(CostKind::Tv.eval(&out) < 1e-9);
}

#[test]
fn restores_scene_with_rising_isnr() {
    let (orig, z, h) = blurred_scene(40.0, 7);
    let (_, trace) = deconvolve(&z, &h, &SolverConfig::default(), Some(&orig)).unwrap();
    let isnr = trace.isnr_series();
    assert_eq!(isnr.len(), 10);
    assert!(isnr.iter().all(|v| v.is_finite()));
    let peak = isnr.iter().cloned().fold(f64::MIN, f64::max);
    assert!(peak > isnr[0]);
    assert!(*isnr.last().unwrap() > 0.0);
}

#[test]
fn deterministic() {
    let (orig, z, h) = blurred_scene(35.0, 3);
    let cfg = SolverConfig {
        outer_iters: 3,
        ..SolverConfig::default()
    };
    let a = deconvolve(&z, &h, &cfg, Some(&orig)).unwrap();
    let b = deconvolve(&z, &h, &cfg, Some(&orig)).unwrap();
    assert_eq!(a.0, b.0);
    assert_eq!(a.1, b.1);
}

#[test]
fn sweep_lands_on_measurements() {
    // each row projection is exact, so after a sweep only the coupling
    // between overlapping rows is left; it shrinks round after round
    let (_, z, h) = blurred_scene(40.0, 1);
    let (_, trace) = deconvolve(&z, &h, &SolverConfig::default(), None).unwrap();
    for r in &trace.outer {
        assert!(r.residual_after_sweep < r.residual_before_sweep);
    }
}

#[test]
fn cutting_plane_never_raises_tv() {
    let orig = Image::new(
        8,
        8,
        (0..64)
            .map(|i| if (i % 8) < 4 { 10.0 } else { 30.0 })
            .collect(),
    )
    .unwrap();
    let h = Kernel::boxcar(3).unwrap();
    let z = convolve_full(&orig, &h);
    let cfg = SolverConfig {
        outer_iters: 4,
        epigraph: EpigraphConfig {
            method: EpigraphMethod::CuttingPlane,
            eps: 1e-9,
            max_iters: 500,
            ..EpigraphConfig::default()
        },
        ..SolverConfig::default()
    };
    let (_, trace) = deconvolve(&z, &h, &cfg, Some(&orig)).unwrap();
    for r in &trace.outer {
        assert!(r.cost_after_epigraph <= r.cost_before_epigraph + 1e-6);
    }
}

#[test]
fn every_cost_runs() {
    let (orig, z, h) = blurred_scene(40.0, 2);
    for cost in CostKind::ALL {
        let cfg = SolverConfig {
            outer_iters: 2,
            cost,
            ..SolverConfig::default()
        };
        let (out, _) = deconvolve(&z, &h, &cfg, Some(&orig)).unwrap();
        assert!(out.data().iter().all(|v| v.is_finite()), "{cost}");
    }
}

#[test]
fn slabs_keep_residual_within_band() {
    let (_, z, h) = blurred_scene(40.0, 4);
    let cfg = SolverConfig {
        outer_iters: 2,
        use_slabs: true,
        slab_eps: Some(1.0),
        ..SolverConfig::default()
    };
    let (_, trace) = deconvolve(&z, &h, &cfg, None).unwrap();
    assert_eq!(trace.outer.len(), 2);
}

#[test]
fn trace_rows_round_trip() {
    let (orig, z, h) = blurred_scene(40.0, 5);
    let cfg = SolverConfig {
        outer_iters: 3,
        ..SolverConfig::default()
    };
    let (_, trace) = deconvolve(&z, &h, &cfg, Some(&orig)).unwrap();
    let rows = trace_to_rows(&trace);
    assert!(!rows.is_empty());
    assert_eq!(rows[0].outer, 1);
    assert_eq!(rows[0].inner, 1);
    assert_eq!(rows.last().unwrap().outer, 3);
    assert!(rows.iter().all(|r| r.isnr_db.is_some()));
    let back = parse_trace_csv(&write_trace_csv(&rows)).unwrap();
    for (a, b) in rows.iter().zip(&back) {
        assert!((a.dist_to_v0 - b.dist_to_v0).abs() <= 1e-12 * (1.0 + a.dist_to_v0.abs()));
        assert!((a.cost_value - b.cost_value).abs() <= 1e-12 * (1.0 + a.cost_value.abs()));
    }
}

#[test]
fn rejects_bad_inputs() {
    let z = Image::filled(8, 8, 1.0).unwrap();
    let h = Kernel::boxcar(3).unwrap();
    let cfg = SolverConfig {
        outer_iters: 0,
        ..SolverConfig::default()
    };
    assert!(matches!(
        deconvolve(&z, &h, &cfg, None).unwrap_err().error,
        Error::Config(_)
    ));
    let truth = Image::filled(4, 4, 1.0).unwrap();
    assert!(matches!(
        deconvolve(&z, &h, &SolverConfig::default(), Some(&truth))
            .unwrap_err()
            .error,
        Error::Shape { .. }
    ));
    let cfg = SolverConfig {
        use_slabs: true,
        ..SolverConfig::default()
    };
    assert!(deconvolve(&z, &h, &cfg, None).is_err());
}

#[test]
fn exact_epigraph_step_oversmooths() {
    // the exact projection of a whole image onto the TV epigraph pulls it
    // most of the way to a constant, which is why the solver defaults to
    // the single-hyperplane step
    let (orig, z, h) = blurred_scene(40.0, 7);
    let run = |method| {
        let cfg = SolverConfig {
            outer_iters: 3,
            epigraph: EpigraphConfig {
                method,
                ..EpigraphConfig::default()
            },
            ..SolverConfig::default()
        };
        *deconvolve(&z, &h, &cfg, Some(&orig)).unwrap().1.isnr_series().last().unwrap()
    };
    let exact = run(EpigraphMethod::CuttingPlane);
    let single = run(EpigraphMethod::SingleHyperplane);
    assert!(exact < 0.0, "{exact}");
    assert!(single > exact);
}
