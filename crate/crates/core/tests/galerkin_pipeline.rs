use galpat::baselines::dd_reconstruct;
use galpat::basis::{gram_kernel, BasisGrid, Generator};
use galpat::galerkin::{reconstruct_image, CgOptions, GalerkinSystem, Solver};
use galpat::image::Raster;
use galpat::metrics::stability_gap;
use galpat::wave::{
    add_noise_with, t_inner, BasisForward, DetectorGeometry, NoiseModel, TimeGrid, WaveQuadrature,
};
use galpat::Sinogram64;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Setup {
    gen: Generator<f64>,
    forward: BasisForward<f64>,
}

fn setup(gen: Generator<f64>, n: usize, s: f64, t_final: f64) -> Setup {
    let grid = BasisGrid::with_resolution(n, s, 1.0).unwrap();
    let geometry = DetectorGeometry::new(1.0, 100).unwrap();
    let time = TimeGrid::new(t_final, (500.0 * t_final) as usize).unwrap();
    let forward =
        BasisForward::new(&gen, &grid, &geometry, &time, &WaveQuadrature::default()).unwrap();
    Setup { gen, forward }
}

fn kb() -> Generator<f64> {
    Generator::kaiser_bessel(1, 2.0, 2.0).unwrap()
}

/// Smooth coefficients on the basis functions whose support lies inside the detector circle.
fn interior_coefficients(grid: &BasisGrid<f64>) -> Vec<f64> {
    let reach = 2.0 * grid.t();
    grid.indices()
        .iter()
        .map(|&k| {
            let c = grid.center(k);
            let r = c[0].hypot(c[1]);
            if r + reach < grid.radius() {
                (1.0 - r * r) * (2.0 * c[0] + 1.0).cos()
            } else {
                0.0
            }
        })
        .collect()
}

fn solve(s: &Setup, g: &Sinogram64) -> Vec<f64> {
    let system = GalerkinSystem::assemble(&s.gen, &s.forward, g).unwrap();
    system.solve(&Solver::Cholesky).unwrap().coefficients
}

fn relative(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
    let den: f64 = b.iter().map(|y| y * y).sum();
    (num / den).sqrt()
}

#[test]
fn recovers_function_in_trial_space() {
    // The window extends past T = 3 so the slowly decaying 2D wave tail is negligible.
    let s = setup(kb(), 20, 1.3265, 6.0);
    let grid = s.forward.grid().clone();
    let truth = interior_coefficients(&grid);
    let g = s.forward.apply(&truth).unwrap();
    let err = relative(&solve(&s, &g), &truth);
    assert!(err <= 2e-2, "coefficient error {err}");
}

#[test]
fn single_basis_function_is_reproduced() {
    // Pixel edges converge slowly in the time step.
    for (gen, shift, tol) in [(kb(), 1.3265, 1e-2), (Generator::Pixel, 1.0, 5e-2)] {
        let s = setup(gen, 16, shift, 3.0);
        let grid = s.forward.grid().clone();
        let mut unit = vec![0.0; grid.len()];
        unit[grid.position([0, 0]).unwrap()] = 1.0;
        let g = s.forward.apply(&unit).unwrap();
        let c = solve(&s, &g);
        let worst = c
            .iter()
            .zip(&unit)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(worst <= tol, "{}: sup error {worst}", s.gen.name());
    }
}

#[test]
fn data_domain_fit_agrees_with_galerkin() {
    let s = setup(kb(), 20, 1.0, 3.0);
    let grid = s.forward.grid().clone();
    let truth = interior_coefficients(&grid);
    let g = s.forward.apply(&truth).unwrap();
    let raster = Raster::centers(&grid);
    let galerkin = reconstruct_image(&s.gen, &grid, &solve(&s, &g), &raster).unwrap();
    let options = CgOptions {
        max_iter: 200,
        tol: 1e-12,
    };
    let dd = dd_reconstruct(&s.gen, &s.forward, &g, &options, &raster).unwrap();
    let err = relative(dd.image.values(), galerkin.values());
    assert!(err <= 5e-2, "dd vs galerkin {err}");
}

#[test]
fn noise_perturbation_is_bounded_by_data_error() {
    let s = setup(kb(), 20, 1.0, 3.0);
    let grid = s.forward.grid().clone();
    let g = s.forward.apply(&interior_coefficients(&grid)).unwrap();
    let clean = solve(&s, &g);
    let kernel = gram_kernel(&s.gen, grid.s(), 401).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for model in [NoiseModel::RelativeNorm, NoiseModel::DataVariance] {
        for level in [0.025, 0.05, 0.2] {
            let (noisy, e) = add_noise_with(&g, level, rng.random(), model).unwrap();
            let delta = t_inner(&e, &e).unwrap().sqrt();
            let gap = stability_gap(&solve(&s, &noisy), &clean, &grid, &kernel, delta).unwrap();
            assert!(
                gap.holds(1.1),
                "{model:?} {level}: {} > {}",
                gap.lhs,
                gap.rhs
            );
        }
    }
}
