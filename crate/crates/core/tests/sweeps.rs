use spray_flame::analysis::{eps_sweep, mu_sweep, overlap_sweep, refinement_study, FiniteEpsilon};
use spray_flame::model::{FlameConfig, Laws, ReactionLaw, VaporisationLaw};
use spray_flame::solver::{Grid, SolverSettings, WaveProblem};

fn laws(delta: f64) -> Laws {
    Laws::new(ReactionLaw::arrhenius(0.5, 0.1).unwrap(), VaporisationLaw::power_law((-1f64).exp(), 1.0, delta).unwrap())
        .unwrap()
}

#[test]
fn speed_converges_at_second_order_in_h() {
    let p = WaveProblem::new(laws(0.0), FlameConfig::gaseous(1.0).unwrap());
    let study = refinement_study(&p, &Grid::new(30.0, 1025).unwrap(), 4, &SolverSettings::default()).unwrap();
    assert_eq!(study.n, vec![1025, 2049, 4097, 8193]);
    for order in &study.orders {
        assert!((1.7..=2.3).contains(order), "{study:?}");
    }
}

#[test]
fn eps_sweep_stays_inside_the_bracket_and_orders_points() {
    let p = WaveProblem::new(laws(0.0), FlameConfig::gaseous(1.0).unwrap());
    let ladder = [0.1, 0.09, 0.08, 0.07];
    let grid = Grid::new(20.0, 1025).unwrap();
    let serial = eps_sweep(&p, &ladder, &grid, &SolverSettings::default(), 1).unwrap();
    let parallel = eps_sweep(&p, &ladder, &grid, &SolverSettings::default(), 3).unwrap();
    assert_eq!(serial, parallel);
    assert!(serial.verdict("within_bracket").unwrap().pass);
    assert!(serial.verdict("error_decreasing").unwrap().pass);
    let params: Vec<f64> = serial.points.iter().map(|p| p.param).collect();
    assert_eq!(params, ladder);
    assert!(serial.fit("speed_error").unwrap().rms.is_finite());
}

#[test]
fn eps_sweep_rejects_short_or_unsorted_ladders() {
    let p = WaveProblem::new(laws(0.0), FlameConfig::gaseous(1.0).unwrap());
    let grid = Grid::new(20.0, 257).unwrap();
    let s = SolverSettings::default();
    assert!(eps_sweep(&p, &[0.1, 0.05, 0.02], &grid, &s, 1).is_err());
    assert!(eps_sweep(&p, &[0.1, 0.05, 0.08, 0.02], &grid, &s, 1).is_err());
}

#[test]
fn finite_epsilon_speeds_stay_within_the_regression_envelope() {
    let masses = [0.2, 0.4, 0.8, 1.6];
    let finite = FiniteEpsilon { epsilon: 0.05, grid: Grid::new(30.0, 4097).unwrap() };
    let r = mu_sweep(0.4, &masses, &laws(0.0), 1.0, &SolverSettings::default(), Some(finite), 1).unwrap();
    for p in &r.points {
        let (c, limit) = (p.c.unwrap(), p.c_limit.unwrap());
        assert!(c >= 0.85 * limit, "m_u = {}: {c} vs {limit}", p.param);
    }
    assert!(r.verdict("transition_located").unwrap().pass);
    assert!(r.verdict("plateau").unwrap().pass);
}

#[test]
fn mu_sweep_warns_when_the_grid_misses_the_critical_mass() {
    let r = mu_sweep(0.4, &[1.0, 2.0, 3.0], &laws(0.0), 1.0, &SolverSettings::default(), None, 1).unwrap();
    assert!(r.warnings.iter().any(|w| w.contains("does not span")));
    assert!(r.verdict("transition_located").is_none());
}

#[test]
fn gaseous_overlap_control_is_degenerate() {
    let p = WaveProblem::new(laws(1.0 / 3.0), FlameConfig::gaseous(1.0).unwrap());
    let r =
        overlap_sweep(&p, &[0.1, 0.09, 0.08, 0.07], &Grid::new(20.0, 513).unwrap(), &SolverSettings::default(), 1.0, 1)
            .unwrap();
    assert!(r.degenerate);
    assert!(r.fits.is_empty());
    assert!(r.points.iter().all(|p| p.get("front_excess").is_none()));
}
