use num_bigint::BigUint;
use proptest::prelude::*;
use triramsey::board::{rotate_id, Board};
use triramsey::bounds::bracket_big;
use triramsey::search::winners;
use triramsey::tri::binomial;
use triramsey::{
    bracket, bracket_log2, enumerate_subtriangles, find_draw, is_draw_coloring, mirror_position,
    rotate_position, Coloring, GameConfig, GameState, Move, Player, Position, Status,
    TriangularSet, Variant,
};

/// `[n k]` as the sum over rows `i_1 < ... < i_k` of `prod C(i_j, j)`,
/// one row choice at a time.
fn bracket_oracle(n: u64, k: u64) -> BigUint {
    fn go(level: u64, after: u64, n: u64, k: u64) -> BigUint {
        if level > k {
            return BigUint::from(1u32);
        }
        (after + 1..=n)
            .map(|i| binomial(i, level) * go(level + 1, i, n, k))
            .sum()
    }
    go(1, 0, n, k)
}

fn position() -> impl Strategy<Value = (u64, Position)> {
    (1u64..40)
        .prop_flat_map(|m| (Just(m), 1..=m))
        .prop_flat_map(|(m, row)| {
            (
                Just(m),
                (1..=row).prop_map(move |col| Position::new(row, col)),
            )
        })
}

proptest! {
    #[test]
    fn bracket_matches_row_sum(n in 0u64..22, k in 0u64..6) {
        prop_assume!(k <= n);
        prop_assert_eq!(bracket(n, k).unwrap(), bracket_oracle(n, k));
    }

    #[test]
    fn bracket_big_agrees_with_recursion(n in 0u64..600, k in 0u64..6) {
        let want = if k > n { BigUint::from(0u32) } else { bracket(n, k).unwrap() };
        prop_assert_eq!(bracket_big(&BigUint::from(n), k), want);
    }

    #[test]
    fn bracket_log2_is_close(n in 1u64..300, k in 1u64..6) {
        prop_assume!(k <= n);
        let exact = bracket(n, k).unwrap();
        let bits = exact.bits() as f64;
        let l = bracket_log2(n, k).unwrap();
        prop_assert!(l <= bits && l > bits - 1.0 - 1e-9, "log2 {} vs {} bits", l, bits);
    }

    #[test]
    fn subtriangle_enumeration_is_sorted_and_distinct(n in 0u64..6, k in 0u64..6) {
        prop_assume!(k <= n);
        let full = TriangularSet::full(n);
        let subs = enumerate_subtriangles(&full, k).unwrap();
        prop_assert_eq!(BigUint::from(subs.len()), bracket(n, k).unwrap());
        for w in subs.windows(2) {
            prop_assert!(w[0] < w[1]);
        }
        for s in &subs {
            prop_assert!(s.leq(&full));
        }
    }

    #[test]
    fn rotation_has_order_three((m, pos) in position()) {
        let once = rotate_position(pos, m);
        prop_assert!(once.col >= 1 && once.col <= once.row && once.row <= m);
        prop_assert_eq!(rotate_position(rotate_position(once, m), m), pos);
        prop_assert_eq!(mirror_position(mirror_position(pos)), pos);
        prop_assert_eq!(rotate_id(pos.id(), m), once.id());
    }

    #[test]
    fn colour_swap_swaps_winners(m in 2u64..6, p in 1u64..5, q in 1u64..5, bits in any::<u64>()) {
        prop_assume!(p <= m && q <= m);
        let config = GameConfig::new(m, p, q, 1);
        let cells = (m * (m + 1) / 2) as usize;
        let c = Coloring::from_fn(cells, |i| if bits >> i & 1 == 1 { Player::Two } else { Player::One });
        let (a, b) = winners(&c, config).unwrap();
        let (b2, a2) = winners(&c.swap_colors(), GameConfig::new(m, q, p, 1)).unwrap();
        prop_assert_eq!((a, b), (a2, b2));
        let back = Coloring::from_hex(&c.to_hex(), cells).unwrap();
        prop_assert_eq!(back, c);
    }

    #[test]
    fn draws_restrict_to_draws(m in 3u64..6, p in 2u64..4, q in 2u64..4, k in 1u64..3, seed in 0u64..64) {
        prop_assume!(p < m && q < m && k <= p && k <= q);
        let config = GameConfig::new(m, p, q, k);
        let out = triramsey::search::find_draw_seeded(config, triramsey::search::Strategy::Randomized, 2_000, seed).unwrap();
        if let Some(w) = out.witness() {
            prop_assert!(is_draw_coloring(w, config).unwrap());
            let small = w.restrict(&Board::new(m, k), &Board::new(m - 1, k));
            prop_assert!(is_draw_coloring(&small, GameConfig::new(m - 1, p, q, k)).unwrap());
        }
    }

    #[test]
    fn random_games_stay_consistent(
        m in 2u64..5,
        n in 1u64..4,
        directional in any::<bool>(),
        picks in proptest::collection::vec(any::<proptest::sample::Index>(), 0..16),
    ) {
        prop_assume!(n <= m);
        let mut config = GameConfig::new(m, n, n, 1);
        if directional {
            config.variant = Variant::Directional;
        }
        let mut s = GameState::new(config).unwrap();
        let mut marks = 0;
        for pick in picks {
            if s.status().is_over() {
                prop_assert!(s.legal_moves().is_err());
                break;
            }
            let moves = s.legal_moves().unwrap();
            prop_assert_eq!(moves.len(), s.cell_count() - marks + 1);
            let mv = *pick.get(&moves);
            let mover = s.to_move();
            s = s.apply(mv).unwrap();
            if let Move::Mark(c) = mv {
                marks += 1;
                prop_assert_eq!(s.owner(c), Some(mover));
            }
            prop_assert_eq!(s.to_move(), mover.other());
            prop_assert!(s.owned(Player::One).is_disjoint(s.owned(Player::Two)));
            if let Status::Won { player, .. } = s.status() {
                prop_assert_eq!(*player, mover);
            }
        }
        // the wire form replays to the same state
        let json = serde_json::to_string(&s).unwrap();
        let back: GameState = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(back, s);
    }
}

#[test]
fn found_draws_on_small_boards_verify() {
    for (m, p, q, k) in [(4, 3, 3, 1), (4, 2, 4, 1), (4, 3, 3, 2), (5, 3, 3, 2)] {
        let config = GameConfig::new(m, p, q, k);
        let out = find_draw(config, triramsey::search::Strategy::Backtracking, 1 << 20).unwrap();
        let w = out.witness().unwrap_or_else(|| panic!("{config}: no draw"));
        assert!(is_draw_coloring(w, config).unwrap());
    }
}
