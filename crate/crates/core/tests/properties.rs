use proptest::prelude::*;

use liouville_ap::arith::{big_omega_ap, factorize, lambda_ap, small_omega_ap};
use liouville_ap::io::{read_checkpoint, read_series_csv, write_checkpoint, write_series_csv};
use liouville_ap::sieve::{class_mask, sieve_block, sieve_parity_block, PrimeTable, SieveConfig};
use liouville_ap::summatory::{
    scan, Extremum, Scan, ScanState, SeriesSpec, SeriesState,
};
use liouville_ap::ResidueSet;

/// A modulus and a nonempty residue set for it.
fn residue_set(max_q: u64) -> impl Strategy<Value = ResidueSet> {
    (2..=max_q).prop_flat_map(|q| {
        proptest::collection::btree_set(0..q, 1..=q as usize)
            .prop_map(move |set| ResidueSet::new(q, set).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn lambda_is_completely_multiplicative(rs in residue_set(30), m in 1u64..1_000_000, n in 1u64..1_000_000) {
        prop_assert_eq!(
            lambda_ap(m * n, &rs).unwrap(),
            lambda_ap(m, &rs).unwrap() * lambda_ap(n, &rs).unwrap()
        );
    }

    #[test]
    fn classes_partition_the_prime_factors(q in 2u64..40, n in 1u64..1u64 << 40) {
        let f = factorize(n).unwrap();
        let (mut big, mut small) = (0, 0);
        for a in 0..q {
            let rs = ResidueSet::single(q, a).unwrap();
            big += big_omega_ap(n, &rs).unwrap();
            small += small_omega_ap(n, &rs).unwrap();
        }
        prop_assert_eq!(big, f.big_omega());
        prop_assert_eq!(small, f.small_omega());
    }

    #[test]
    fn residue_set_text_round_trip(rs in residue_set(64)) {
        prop_assert_eq!(rs.to_string().parse::<ResidueSet>().unwrap(), rs.clone());
        let spec = SeriesSpec::lambda(rs);
        prop_assert_eq!(spec.label().parse::<SeriesSpec>().unwrap(), spec);
    }

    #[test]
    fn sieve_block_matches_oracle(lo in 1u64..1u64 << 36, len in 1u64..300, rs in residue_set(64)) {
        let q = rs.modulus();
        let table = PrimeTable::covering(lo + len);
        let counts = sieve_block(lo, lo + len, q, &table).unwrap();
        let parity = sieve_parity_block(lo, lo + len, q, &table).unwrap();
        let mut lam = Vec::new();
        parity.lambda_into(class_mask(&rs, q).unwrap(), &mut lam);
        for i in 0..len as usize {
            let n = lo + i as u64;
            prop_assert_eq!(counts.big_omega_in(i, &rs), big_omega_ap(n, &rs).unwrap());
            prop_assert_eq!(counts.small_omega_in(i, &rs), small_omega_ap(n, &rs).unwrap());
            prop_assert_eq!(lam[i], lambda_ap(n, &rs).unwrap());
        }
    }
}

fn extremum() -> impl Strategy<Value = Option<Extremum>> {
    proptest::option::of((1u64..1 << 40, any::<i64>()).prop_map(|(x, value)| Extremum { x, value }))
}

fn series_state() -> impl Strategy<Value = SeriesState> {
    (
        residue_set(12),
        any::<i64>(),
        -1i8..=1,
        proptest::collection::vec(1u64..1 << 40, 0..20),
        extremum(),
        extremum(),
        proptest::collection::vec((1u64..1 << 40, any::<i64>()), 0..20),
    )
        .prop_map(|(rs, sum, sign, events, max, min, checkpoints)| SeriesState {
            label: SeriesSpec::lambda(rs).label().to_string(),
            sum,
            sign,
            events,
            max,
            min,
            checkpoints,
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn checkpoint_text_round_trip(
        series in proptest::collection::vec(series_state(), 0..4),
        modulus in 2u64..64,
        xmax in 2u64..1 << 50,
        block_size in 1024u64..1 << 24,
        next_lo in 1u64..1 << 50,
        ratio in 1.0001f64..10.0,
    ) {
        let state = ScanState { modulus, xmax, block_size, ratio, next_lo, series };
        let mut buf = Vec::new();
        write_checkpoint(&mut buf, &state).unwrap();
        prop_assert!(buf.is_ascii());
        let back = read_checkpoint(buf.as_slice()).unwrap();
        prop_assert_eq!(back.ratio.to_bits(), state.ratio.to_bits());
        prop_assert_eq!(back, state);
    }
}

fn q4_specs() -> Vec<SeriesSpec> {
    vec![
        SeriesSpec::lambda(ResidueSet::single(4, 1).unwrap()),
        SeriesSpec::lambda(ResidueSet::new(4, [0, 3]).unwrap()),
        SeriesSpec::classical(),
        SeriesSpec::small_omega(4, 1).unwrap(),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn scan_output_ignores_workers_and_interruptions(
        xmax in 2u64..60_000,
        workers in 1usize..6,
        stop_frac in 0.0f64..1.0,
    ) {
        let cfg = SieveConfig::new(xmax, 4).unwrap().with_block_size(1024).unwrap();
        let reference = scan(&q4_specs(), &cfg, 1.05).unwrap();

        let parallel = cfg.clone().with_workers(workers).unwrap();
        prop_assert_eq!(&scan(&q4_specs(), &parallel, 1.05).unwrap(), &reference);

        let mut first = Scan::new(q4_specs(), parallel.clone(), 1.05).unwrap();
        first.run_until((xmax as f64 * stop_frac) as u64, |_| {}).unwrap();
        let mut saved = Vec::new();
        write_checkpoint(&mut saved, first.state()).unwrap();
        let state = read_checkpoint(saved.as_slice()).unwrap();
        let mut second = Scan::resume(state, q4_specs(), parallel, 1.05).unwrap();
        second.run(|_| {}).unwrap();
        let resumed = second.finish().unwrap();
        prop_assert_eq!(&resumed, &reference);

        let (mut a, mut b) = (Vec::new(), Vec::new());
        write_series_csv(&mut a, &reference).unwrap();
        write_series_csv(&mut b, &resumed).unwrap();
        prop_assert_eq!(&a, &b);
        let table = read_series_csv(a.as_slice()).unwrap();
        for s in &reference {
            prop_assert_eq!(table.column(s.spec.label()).unwrap(), s.checkpoints.clone());
        }
    }
}
