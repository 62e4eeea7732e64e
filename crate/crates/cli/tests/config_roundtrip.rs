//! parse(serialize(c)) = c over randomly generated configurations.

use nplab_cli::config::*;
use nplab_core::dunkl::{Preset, RootSystemConfig};
use nplab_core::field::FieldSpec;
use nplab_core::fractal::WeierstrassSpec;
use nplab_core::quad::QuadSpec;
use nplab_core::region::{Coord, Shape};
use proptest::prelude::*;

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![-1e3..1e3f64, (-300i32..300).prop_map(|e| 1.234_567_890_123_456_7 * 10f64.powi(e))]
}

fn coord() -> impl Strategy<Value = Coord> {
    prop_oneof![finite().prop_map(Coord), Just(Coord(f64::INFINITY)), Just(Coord(f64::NEG_INFINITY))]
}

fn shape() -> impl Strategy<Value = Shape> {
    let leaf = prop_oneof![
        Just(Shape::Empty),
        Just(Shape::Whole),
        prop::collection::vec((coord(), coord()).prop_map(|(a, b)| [a, b]), 1..4).prop_map(Shape::IntervalUnion),
        (finite(), finite()).prop_map(|(a, b)| Shape::Sector { start: a, end: b }),
        (prop::collection::vec(finite(), 2), 0.0..10.0f64).prop_map(|(c, r)| Shape::Ball { center: c, radius: r }),
        (prop::collection::vec(finite(), 2), finite()).prop_map(|(n, o)| Shape::HalfSpace { normal: n, offset: o }),
    ];
    leaf.prop_recursive(2, 8, 3, |inner| {
        prop_oneof![
            inner.clone().prop_map(|s| Shape::Complement(Box::new(s))),
            prop::collection::vec(inner.clone(), 1..3).prop_map(Shape::Union),
            prop::collection::vec(inner, 1..3).prop_map(Shape::Intersection),
        ]
    })
}

fn field() -> impl Strategy<Value = FieldSpec> {
    let leaf = prop_oneof![
        Just(FieldSpec::Zero),
        finite().prop_map(|value| FieldSpec::Constant { value }),
        shape().prop_map(|shape| FieldSpec::Indicator { shape }),
        (finite(), 0.1..5.0f64, finite()).prop_map(|(c, h, height)| FieldSpec::Tent { center: vec![c], half_width: h, height }),
    ];
    leaf.prop_recursive(2, 6, 2, |inner| {
        prop_oneof![
            (finite(), inner.clone()).prop_map(|(factor, f)| FieldSpec::Scaled { factor, field: Box::new(f) }),
            (inner.clone(), inner).prop_map(|(a, b)| FieldSpec::Max(Box::new(a), Box::new(b))),
        ]
    })
}

fn root_system() -> impl Strategy<Value = RootSystemConfig> {
    prop_oneof![
        (1usize..4).prop_map(RootSystemConfig::trivial),
        (0.0..3.0f64).prop_map(|k| RootSystemConfig {
            dimension: 1,
            preset: Some(Preset::Z2),
            roots: None,
            multiplicity: vec![k]
        }),
        prop::collection::vec(0.0..3.0f64, 2).prop_map(|k| RootSystemConfig {
            dimension: 2,
            preset: Some(Preset::Z2Product),
            roots: None,
            multiplicity: k
        }),
    ]
}

fn quad() -> impl Strategy<Value = QuadSpec> {
    (1e-12..0.5f64, 15usize..1_000_000, 1usize..1 << 20, any::<u64>()).prop_map(|(rel_tol, max_evals, mc, seed)| {
        QuadSpec { rel_tol, max_evals, mc_samples: mc, seed, ..QuadSpec::default() }
    })
}

fn params() -> impl Strategy<Value = Params> {
    prop_oneof![
        (field(), 0.5..4.0f64, prop::option::of(coord()), any::<bool>()).prop_map(|(function, p, q, compare_gagliardo)| {
            Params::Seminorm(SeminormParams { function, p, q, compare_gagliardo, lattice: vec![] })
        }),
        (field(), 0.5..4.0f64).prop_map(|(function, p)| Params::MsLimit(MsLimitParams { function, p })),
        (shape(), shape(), any::<bool>()).prop_map(|(e, omega, classical)| {
            Params::Perimeter(PerimeterParams { e, omega, classical, oracle: None })
        }),
        (shape(), shape(), prop::option::of(0.0..1.0f64), any::<bool>()).prop_map(|(e, omega, xi, converse)| {
            Params::RelativeLimit(RelativeLimitParams { e, omega, xi, converse, converse_tolerance: 0.05 })
        }),
        (shape(), prop::option::of(finite())).prop_map(|(e, target)| {
            Params::Xi(XiParams { e, x: None, r: 1.0, target, complement: false })
        }),
        (shape(), prop::option::of(finite())).prop_map(|(e, upper_bound)| Params::Iota(IotaParams { e, target: None, upper_bound })),
        (shape(), 0.0..1.0f64).prop_map(|(e, max_ratio)| {
            Params::WeightedPerimeter(WeightedPerimeterParams { e, omega: Shape::Whole, max_ratio })
        }),
        (0.4..0.9f64, 3.0..5.0f64, 1usize..20, prop::collection::vec(0.001..1.0f64, 4..6)).prop_map(|(a, b, terms, r)| {
            Params::Fractal(FractalParams {
                weierstrass: WeierstrassSpec { a, b, terms },
                delta0: 0.125,
                dimension_tolerance: 0.15,
                boundary: vec![BoundaryCase {
                    domain: Shape::Whole,
                    r_grid: RadiusGrid::List(r),
                    eta_target: Some(1.0),
                    eta_tolerance: 0.05,
                    s0: None,
                }],
            })
        }),
        (prop::collection::vec(0.0..2.0f64, 0..3), 0usize..40).prop_map(|(kappas, tuples)| {
            Params::VerifyKernel(VerifyKernelParams {
                kappas,
                t_grid: vec![0.1, 1.0],
                points: vec![0.0],
                tuples,
                completeness_tolerance: 1e-6,
                semigroup_tolerance: 1e-5,
            })
        }),
        (prop::collection::vec(shape(), 0..3), shape(), 0.01..0.99f64, 0usize..20).prop_map(|(regions, omega, s, count)| {
            Params::PropertiesSuite(PropertiesSuiteParams { regions, omega, s, count })
        }),
    ]
}

fn run_config() -> impl Strategy<Value = RunConfig> {
    (
        root_system(),
        any::<u64>(),
        quad(),
        prop::option::of(prop::collection::vec(1e-4..0.99f64, 1..6)),
        prop::option::of(1e-9..1.0f64),
        prop::option::of("[a-z/]{1,12}"),
        params(),
    )
        .prop_map(|(root_system, seed, quad, s_grid, tolerance, output, params)| RunConfig {
            root_system,
            seed,
            quad,
            s_grid,
            tolerance,
            output,
            params,
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn configurations_round_trip(c in run_config()) {
        let text = c.to_json();
        let back = parse_config(&text).map_err(|e| TestCaseError::fail(format!("{e}\n{text}")))?;
        prop_assert_eq!(&back, &c);
        prop_assert_eq!(back.canonical(), c.canonical());
    }

    #[test]
    fn arbitrary_text_never_panics(s in "\\PC{0,200}") {
        let _ = parse_config(&s);
    }
}
