use uniformity_lab::counting::{count_configs, CountingParams};
use uniformity_lab::search::{
    density_table, find_config, greedy_free_set, max_free_set_exact, YMode,
};

/// Largest configuration-free subset of `[N]` by checking all `2^N` subsets.
fn brute_force_max(n: u64, q: u64, mode: YMode) -> usize {
    let p = CountingParams::new(q, n).unwrap();
    let mut best = 0;
    for mask in 0u64..(1 << n) {
        let size = mask.count_ones() as usize;
        if size <= best {
            continue;
        }
        let set: Vec<i64> = (1..=n as i64).filter(|x| mask >> (x - 1) & 1 == 1).collect();
        if find_config(&set, &p, mode).unwrap().is_none() {
            best = size;
        }
    }
    best
}

#[test]
fn exact_matches_enumeration_up_to_20() {
    for n in 1..=20 {
        let p = CountingParams::new(1, n).unwrap();
        let (size, set) = max_free_set_exact(&p, YMode::Bounded).unwrap();
        assert_eq!(size, brute_force_max(n, 1, YMode::Bounded), "N = {n}");
        assert_eq!(set.len(), size);
        assert_eq!(find_config(&set, &p, YMode::Bounded).unwrap(), None);
    }
}

#[test]
fn bounded_and_unbounded_agree_on_subsets_of_n() {
    for q in 1..=3 {
        for n in [q, 10, 25, 40] {
            let p = CountingParams::new(q, n).unwrap();
            let (a, _) = max_free_set_exact(&p, YMode::Bounded).unwrap();
            let (b, _) = max_free_set_exact(&p, YMode::Unbounded).unwrap();
            assert_eq!(a, b, "q = {q}, N = {n}");
            assert_eq!(brute_force_max(n.min(14), q, YMode::Unbounded), brute_force_max(n.min(14), q, YMode::Bounded));
        }
    }
}

#[test]
fn exact_sizes_are_monotone_and_beat_greedy() {
    for q in 1..=2 {
        let ns: Vec<u64> = (q..=40).collect();
        let rows = density_table(q, &ns, YMode::Bounded, 40).unwrap();
        assert_eq!(rows.len(), ns.len());
        for w in rows.windows(2) {
            assert!(w[0].size <= w[1].size && w[1].size <= w[0].size + 1);
        }
        for row in &rows {
            let p = CountingParams::new(q, row.n).unwrap();
            let greedy = greedy_free_set(&p, YMode::Bounded);
            assert!(greedy.len() <= row.size);
            assert_eq!(count_configs(&greedy, &p).unwrap(), 0);
            if q == 1 {
                // y = 1 gives x, x + 1, x + 1, so free sets have no two consecutive elements
                assert!(row.size as u64 <= row.n.div_ceil(2));
            }
        }
    }
}

#[test]
fn small_values() {
    let p = CountingParams::new(1, 6).unwrap();
    assert_eq!(max_free_set_exact(&p, YMode::Bounded).unwrap().0, 3);
    let p = CountingParams::new(1, 1).unwrap();
    assert_eq!(max_free_set_exact(&p, YMode::Bounded).unwrap(), (1, vec![1]));
    let p = CountingParams::new(1, 41).unwrap();
    assert!(max_free_set_exact(&p, YMode::Bounded).is_err());
}
