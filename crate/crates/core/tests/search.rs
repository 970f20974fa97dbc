mod common;

use blockmix::selection::Visited;
use blockmix::{
    forward_search, generate, grid_search, scenario_spec, ColumnCoupling, GridRanges, ModelSpec,
    Scenario, SearchConfig, SemConfig, SigmaReading,
};
use common::*;

fn quick() -> SemConfig {
    SemConfig {
        burn_in: 5,
        iterations: 20,
        final_partition_runs: 5,
        ..SemConfig::with_seed(2)
    }
}

fn score(v: &[Visited], s: ModelSpec) -> f64 {
    v.iter().find(|e| e.spec == s).map(|e| e.score()).unwrap()
}

#[test]
fn unit_grid_visits_one_spec() {
    let mut r = rng(1);
    let x = random_data(&mut r, 10, 8);
    let rec = grid_search(
        &x,
        &GridRanges::cube(1..=1),
        &quick(),
        ColumnCoupling::Free,
        1,
    )
    .unwrap();
    assert_eq!(rec.visited.len(), 1);
    assert_eq!(rec.chosen, ModelSpec::new(1, 1, 1).unwrap());
    assert_eq!(rec.best.as_ref().unwrap().spec, rec.chosen);
}

#[test]
fn grid_choice_is_the_argmax() {
    let gs = scenario_spec(Scenario::Sim1, SigmaReading::Variance)
        .with_size(60, 30)
        .with_seed(3);
    let (x, _) = generate(&gs);
    let rec = grid_search(
        &x,
        &GridRanges::cube(1..=3),
        &quick(),
        ColumnCoupling::Free,
        1,
    )
    .unwrap();
    assert_eq!(rec.visited.len(), 27);
    let top = rec
        .visited
        .iter()
        .map(|v| v.score())
        .fold(f64::NEG_INFINITY, f64::max);
    assert_eq!(rec.chosen_icl_bic, top);
    assert_eq!(score(&rec.visited, rec.chosen), top);
    let again = grid_search(
        &x,
        &GridRanges::cube(1..=3),
        &quick(),
        ColumnCoupling::Free,
        1,
    )
    .unwrap();
    assert_eq!(rec.visited, again.visited);
}

#[test]
fn forward_on_noise_stops_early() {
    let mut r = rng(5);
    let x = random_data(&mut r, 60, 40);
    let cfg = SearchConfig {
        sem: quick(),
        ..SearchConfig::default()
    };
    let rec = forward_search(&x, &cfg).unwrap();
    let c = rec.chosen;
    assert!(c.g + c.l_mu + c.l_sigma <= 4, "chosen {c}");
    for n in [
        (c.g + 1, c.l_mu, c.l_sigma),
        (c.g, c.l_mu + 1, c.l_sigma),
        (c.g, c.l_mu, c.l_sigma + 1),
    ] {
        let s = ModelSpec::new(n.0, n.1, n.2).unwrap();
        if let Some(v) = rec.visited.iter().find(|v| v.spec == s) {
            assert!(rec.chosen_icl_bic >= v.score());
        }
    }
}

#[test]
fn forward_path_is_legal_and_uses_grid_scores() {
    let gs = scenario_spec(Scenario::Sim2, SigmaReading::Variance)
        .with_size(60, 80)
        .with_seed(7);
    let (x, _) = generate(&gs);
    let cfg = SearchConfig {
        max: ModelSpec::new(3, 3, 3).unwrap(),
        sem: quick(),
        ..SearchConfig::default()
    };
    let rec = forward_search(&x, &cfg).unwrap();
    assert_eq!(rec.path[0].spec, ModelSpec::new(1, 1, 1).unwrap());
    for w in rec.path.windows(2) {
        let (a, b) = (w[0].spec, w[1].spec);
        let inc = (b.g - a.g) + (b.l_mu - a.l_mu) + (b.l_sigma - a.l_sigma);
        assert_eq!(inc, 1);
        assert!(w[1].icl_bic > w[0].icl_bic);
    }
    assert_eq!(rec.path.last().unwrap().spec, rec.chosen);

    // same seeds per spec: every forward score equals the grid's
    let grid = grid_search(
        &x,
        &GridRanges::cube(1..=3),
        &quick(),
        ColumnCoupling::Free,
        1,
    )
    .unwrap();
    for v in &rec.visited {
        assert_eq!(v.score(), score(&grid.visited, v.spec), "{}", v.spec);
    }
}

#[test]
fn traditional_search_stays_tied() {
    let gs = scenario_spec(Scenario::Sim1, SigmaReading::Variance)
        .with_size(40, 20)
        .with_seed(1);
    let (x, _) = generate(&gs);
    let cfg = SearchConfig {
        max: ModelSpec::new(3, 3, 3).unwrap(),
        coupling: ColumnCoupling::Tied,
        sem: quick(),
        ..SearchConfig::default()
    };
    let rec = forward_search(&x, &cfg).unwrap();
    assert!(rec.visited.iter().all(|v| v.spec.l_mu == v.spec.l_sigma));
    let grid = grid_search(
        &x,
        &GridRanges::cube(1..=2),
        &quick(),
        ColumnCoupling::Tied,
        1,
    )
    .unwrap();
    assert_eq!(grid.visited.len(), 4);
}

#[test]
fn more_fits_never_lower_a_candidate() {
    let gs = scenario_spec(Scenario::Sim2, SigmaReading::Variance)
        .with_size(40, 60)
        .with_seed(12);
    let (x, _) = generate(&gs);
    let ranges = GridRanges::cube(2..=3);
    let one = grid_search(&x, &ranges, &quick(), ColumnCoupling::Free, 1).unwrap();
    let three = grid_search(&x, &ranges, &quick(), ColumnCoupling::Free, 3).unwrap();
    for v in &one.visited {
        assert!(score(&three.visited, v.spec) >= v.score());
    }
}
