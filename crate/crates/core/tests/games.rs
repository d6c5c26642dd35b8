use triramsey::solver::{Outcome, Solver, DEFAULT_NODE_BUDGET};
use triramsey::{GameConfig, GameState, Move, Player, Status, Variant};

fn at(id: usize) -> Move {
    Move::Mark(id - 1)
}

/// Engine plays P1 from every reachable position; P2 tries every reply.
fn engine_never_loses(solver: &Solver, state: GameState, games: &mut u64) {
    match state.status() {
        Status::Won { player, .. } => {
            assert_eq!(*player, Player::One, "engine lost: {:?}", state.history());
            *games += 1;
            return;
        }
        Status::Draw { .. } => panic!("engine drew: {:?}", state.history()),
        Status::Ongoing => {}
    }
    if state.to_move() == Player::One {
        let mv = solver.best_move(&state).unwrap();
        engine_never_loses(solver, state.apply(mv).unwrap(), games);
    } else {
        for mv in state.legal_moves().unwrap() {
            engine_never_loses(solver, state.apply(mv).unwrap(), games);
        }
    }
}

#[test]
fn engine_wins_every_mines3_game_from_the_first_seat() {
    for v in [Variant::Standard, Variant::Directional] {
        let config = GameConfig::mines3(v);
        let solver = Solver::new(config, DEFAULT_NODE_BUDGET).unwrap();
        let mut games = 0;
        engine_never_loses(&solver, GameState::new(config).unwrap(), &mut games);
        assert!(games > 10, "{v:?}: {games}");
    }
}

#[test]
fn what_if_values_match_fresh_solves() {
    for config in [
        GameConfig::mines3(Variant::Standard),
        GameConfig::mines3(Variant::Directional),
        GameConfig::new(4, 2, 3, 1),
    ] {
        let shared = Solver::new(config, DEFAULT_NODE_BUDGET).unwrap();
        let mut state = GameState::new(config).unwrap();
        // walk one line of play, comparing every preview on the way
        for step in 0..4 {
            if state.status().is_over() {
                break;
            }
            let previews = shared.move_outcomes(&state).unwrap();
            assert_eq!(previews.len(), state.legal_moves().unwrap().len());
            for &(mv, outcome) in &previews {
                let fresh = Solver::new(config, DEFAULT_NODE_BUDGET)
                    .unwrap()
                    .without_symmetry()
                    .solve(&state.apply(mv).unwrap())
                    .unwrap();
                assert_eq!(outcome, fresh.outcome, "{config} step {step} {mv:?}");
                assert_eq!(shared.outcome_after(&state, mv).unwrap(), outcome);
            }
            let mv = previews[step % previews.len()].0;
            state = state.apply(mv).unwrap();
        }
    }
}

#[test]
fn player_two_wins_the_sample_game_with_witness() {
    let config = GameConfig::mines3(Variant::Standard);
    let s = GameState::replay(config, &[at(4), at(5), at(2), at(6), at(3), at(1)]).unwrap();
    match s.status() {
        Status::Won {
            player, witness, ..
        } => {
            assert_eq!(*player, Player::Two);
            assert_eq!(witness.elements(), &[1, 5, 6]);
        }
        other => panic!("{other:?}"),
    }
    assert_eq!(s.render(), "  Y\n X X\nX Y Y\n");
}

#[test]
fn two_passes_end_in_a_draw() {
    let s = GameState::new(GameConfig::mines3(Variant::Standard)).unwrap();
    let s = s.apply(Move::Pass).unwrap().apply(Move::Pass).unwrap();
    assert_eq!(
        s.status(),
        &Status::Draw {
            by_double_pass: true
        }
    );
    assert!(s.apply(at(1)).is_err());
}

#[test]
fn small_boards_solve_as_expected() {
    let value = |m, p, q| {
        let config = GameConfig::new(m, p, q, 1);
        Solver::new(config, DEFAULT_NODE_BUDGET)
            .unwrap()
            .solve(&GameState::new(config).unwrap())
            .unwrap()
            .outcome
    };
    // one cell: whoever needs a single cell takes it first
    assert_eq!(value(1, 1, 1), Outcome::FirstPlayerWin);
    assert_eq!(value(2, 2, 2), Outcome::DrawValue);
    assert_eq!(value(3, 2, 2), Outcome::FirstPlayerWin);
    // P2 cannot be ahead when the goals are equal
    for m in 1..=4 {
        for n in 1..=m.min(3) {
            assert_ne!(
                value(m, n, n),
                Outcome::SecondPlayerWin,
                "Mines_{m}({n},{n},1)"
            );
        }
    }
}
