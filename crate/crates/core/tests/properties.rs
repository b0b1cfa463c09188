//! Property tests for the scheme invariants: convexity of the weights,
//! the bracket identity between the split flux and the raw convex
//! combination, two-point mirror symmetry and exact conservativity.

use proptest::prelude::*;

use nlfv::grid::EdgeSide;
use nlfv::kernel::{trans_value, Kernels, TransTarget};
use nlfv::schemes::{
    convex_weights, edge_flux_stencil, flux_stencil_value, scheme_flux, CWeights, FluxStencil,
};
use nlfv::*;

/// A random 4x3 problem: stretched lines, one SPD tensor per cell with
/// anisotropy up to 1e9, a positive frozen state, a relaxation couple.
#[derive(Debug, Clone)]
struct RandomSetup {
    xl: Vec<f64>,
    yl: Vec<f64>,
    tensors: Vec<SymTensor>,
    state: Vec<f64>,
    c2: f64,
}

fn setup_strategy() -> impl Strategy<Value = RandomSetup> {
    let incr = prop::collection::vec(0.2f64..1.5, 7);
    let cells = prop::collection::vec((0.0f64..std::f64::consts::PI, 0.0f64..9.0, -2.0f64..2.0), 12);
    let state = prop::collection::vec(-2.0f64..2.0, 12);
    (incr, cells, state, 1e-6f64..0.4).prop_map(|(incr, cells, state, c2)| {
        let xl: Vec<f64> = std::iter::once(0.0)
            .chain(incr[..4].iter().scan(0.0, |acc, d| {
                *acc += d;
                Some(*acc)
            }))
            .collect();
        let yl: Vec<f64> = std::iter::once(0.0)
            .chain(incr[4..].iter().scan(0.0, |acc, d| {
                *acc += d;
                Some(*acc)
            }))
            .collect();
        let tensors = cells
            .iter()
            .map(|&(phi, logani, logscale)| {
                let (s, c) = phi.sin_cos();
                let d1 = 10f64.powf(logscale) * 10f64.powf(logani);
                let d2 = 10f64.powf(logscale);
                SymTensor::new(
                    d1 * c * c + d2 * s * s,
                    (d1 - d2) * s * c,
                    d1 * s * s + d2 * c * c,
                )
            })
            .collect();
        let state = state.iter().map(|v| 10f64.powf(*v)).collect();
        RandomSetup { xl, yl, tensors, state, c2 }
    })
}

fn build(setup: &RandomSetup) -> (Grid, Kernels, CWeights) {
    let grid = Grid::from_lines(setup.xl.clone(), setup.yl.clone()).unwrap();
    let tensor = TensorField::PerCell { nx: 4, ny: 3, entries: setup.tensors.clone() };
    let bc = BoundaryConditions::all_dirichlet(BoundaryFn::Affine { a: 1.0, b: 0.2, c: -0.1 });
    let kernels = Kernels::build(&grid, &tensor, None, &bc).unwrap();
    let cw = CWeights::explicit(2.0 * setup.c2, setup.c2).unwrap();
    (grid, kernels, cw)
}

proptest! {
    #[test]
    fn convex_weights_are_a_partition(a in 0.0f64..1e12, b in 0.0f64..1e12) {
        let (m1, m2) = convex_weights(a, b);
        prop_assert!(m1 >= 0.0 && m2 >= 0.0);
        let ulp = (m1 + m2).max(1.0) * f64::EPSILON;
        prop_assert!((m1 + m2 - 1.0).abs() <= 4.0 * ulp);
    }

    #[test]
    fn split_flux_equals_raw_convex_combination(setup in setup_strategy()) {
        // the relaxed flux assembled through the theta branches must agree
        // with mu1 F1 + mu2 F2 recomputed from the raw one-sided fluxes
        let (_, kernels, cw) = build(&setup);
        let f = &setup.state;
        for ek in &kernels.edges {
            for side in [EdgeSide::Minus, EdgeSide::Plus] {
                let (own, other, c_own, c_other) = ek.oriented(side);
                let st = edge_flux_stencil(SchemeKind::Rnlmpfa, ek, side, f, Some(&cw)).unwrap();
                let got = flux_stencil_value(&st, f[c_own], f[c_other], f);

                let (c1, c2) = cw.couple(ek.axis, side);
                let tv_own = trans_value(own.trans, f);
                let tv_oth = trans_value(other.trans, f);
                let f1 = own.lam * (f[c_own] - f[c_other]) + own.nu * (f[c_own] - tv_own);
                let f2 = -other.lam * (f[c_other] - f[c_own]) - other.nu * (f[c_other] - tv_oth);
                let g1 = (1.0 - c1) * own.nu * (f[c_own] - tv_own);
                let g2 = (1.0 - c2) * other.nu * (f[c_other] - tv_oth);
                let (mu1, mu2) = convex_weights(g1.abs(), g2.abs());
                let want = mu1 * f1 + mu2 * f2;

                let scale = f1.abs() + f2.abs() + 1e-300;
                prop_assert!(
                    (got - want).abs() <= 1e-12 * scale,
                    "edge flux {got} vs raw combination {want} (scale {scale})"
                );
            }
        }
    }

    #[test]
    fn two_point_coefficients_mirror(setup in setup_strategy()) {
        // alpha seen from K equals beta seen from L, exactly
        let (_, kernels, _) = build(&setup);
        let f = &setup.state;
        for ek in &kernels.edges {
            let a = edge_flux_stencil(SchemeKind::Nltpfa, ek, EdgeSide::Minus, f, None).unwrap();
            let b = edge_flux_stencil(SchemeKind::Nltpfa, ek, EdgeSide::Plus, f, None).unwrap();
            let (FluxStencil::TwoPoint { alpha: ak, beta: bk }, FluxStencil::TwoPoint { alpha: al, beta: bl }) =
                (a, b)
            else {
                panic!("two-point stencil expected")
            };
            prop_assert!(ak >= 0.0 && bk >= 0.0);
            prop_assert_eq!(ak, bl);
            prop_assert_eq!(bk, al);
        }
    }

    #[test]
    fn multipoint_coefficients_keep_lmp_signs(setup in setup_strategy()) {
        let (_, kernels, _) = build(&setup);
        let f = &setup.state;
        for ek in &kernels.edges {
            for side in [EdgeSide::Minus, EdgeSide::Plus] {
                let st = edge_flux_stencil(SchemeKind::Nlmpfa, ek, side, f, None).unwrap();
                let FluxStencil::Lmp { t_lam, t_m, m } = st else { panic!() };
                prop_assert!(t_lam > 0.0);
                prop_assert!(t_m >= 0.0);
                if t_m > 0.0 {
                    prop_assert!(m != TransTarget::Dropped);
                }
            }
        }
    }

    #[test]
    fn fluxes_conserve_bitwise(setup in setup_strategy()) {
        let (_, kernels, cw) = build(&setup);
        let f = &setup.state;
        for scheme in SchemeKind::all() {
            for ek in &kernels.edges {
                let (fk, fl) = scheme_flux(scheme, ek, f, Some(&cw)).unwrap();
                prop_assert_eq!(fk + fl, 0.0);
                prop_assert_eq!(fk, -fl);
            }
        }
    }

    #[test]
    fn grid_areas_sum_to_domain(incr in prop::collection::vec(0.05f64..2.0, 8)) {
        let xl: Vec<f64> = std::iter::once(0.3)
            .chain(incr[..4].iter().scan(0.3, |a, d| { *a += d; Some(*a) }))
            .collect();
        let yl: Vec<f64> = std::iter::once(-1.0)
            .chain(incr[4..].iter().scan(-1.0, |a, d| { *a += d; Some(*a) }))
            .collect();
        let g = Grid::from_lines(xl, yl).unwrap();
        let total: f64 = (0..g.ny())
            .flat_map(|j| (0..g.nx()).map(move |i| (i, j)))
            .map(|(i, j)| g.cell_area(i, j))
            .sum();
        prop_assert!((total - g.domain_area()).abs() <= 1e-12 * g.domain_area());
    }
}
