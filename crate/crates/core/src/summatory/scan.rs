use rayon::prelude::*;

use super::{checkpoint_grid, Extremum, SeriesKind, SeriesSpec, SummatorySeries};
use crate::error::{Error, Result};
use crate::residue::ResidueSet;
use crate::sieve::{
    class_mask, sieve_block, sieve_parity_block, PrimeTable, SieveConfig, MAX_PARITY_MODULUS,
};

/// Progress of one series, enough to continue the scan from `ScanState::next_lo`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeriesState {
    pub label: String,
    pub sum: i64,
    /// Sign of the last nonzero running sum, 0 before the first one.
    pub sign: i8,
    pub events: Vec<u64>,
    pub max: Option<Extremum>,
    pub min: Option<Extremum>,
    pub checkpoints: Vec<(u64, i64)>,
}

impl SeriesState {
    fn new(label: &str) -> Self {
        Self {
            label: label.to_string(),
            sum: 0,
            sign: 0,
            events: Vec::new(),
            max: None,
            min: None,
            checkpoints: Vec::new(),
        }
    }

    pub fn change_count(&self) -> u64 {
        self.events.len() as u64
    }

    pub fn first_change(&self) -> Option<u64> {
        self.events.first().copied()
    }
}

/// Resumable state of a scan: everything below `next_lo` has been summed.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanState {
    pub modulus: u64,
    pub xmax: u64,
    pub block_size: u64,
    pub ratio: f64,
    pub next_lo: u64,
    pub series: Vec<SeriesState>,
}

impl ScanState {
    pub fn is_complete(&self) -> bool {
        self.next_lo > self.xmax
    }
}

/// Summands of one block handed to an observer, with the running sums before it.
pub struct BlockView<'a> {
    pub lo: u64,
    pub hi: u64,
    pub offsets: &'a [i64],
    pub summands: &'a [Vec<i8>],
}

impl BlockView<'_> {
    /// `(n, running sum at n)` for series `k` across the block.
    pub fn running(&self, k: usize) -> impl Iterator<Item = (u64, i64)> + '_ {
        let lo = self.lo;
        self.summands[k].iter().enumerate().scan(self.offsets[k], move |v, (i, &s)| {
            *v += i64::from(s);
            Some((lo + i as u64, *v))
        })
    }
}

#[derive(Debug, Clone)]
enum Plan {
    Lambda(u64),
    Restricted { mask: u64, progression: ResidueSet },
    Omega { classes: Vec<usize>, distinct: bool },
}

#[derive(Debug, Default)]
struct BlockStats {
    first_nonzero: Option<(u64, i8)>,
    events: Vec<u64>,
    last_sign: i8,
    max: Option<Extremum>,
    min: Option<Extremum>,
    grid: Vec<(u64, i64)>,
    end: i64,
}

fn block_stats(lo: u64, summands: &[i8], offset: i64, grid: &[u64]) -> BlockStats {
    let mut st = BlockStats::default();
    let mut v = offset;
    let mut sign = 0i8;
    let (mut max, mut min) = (Extremum { x: lo, value: i64::MIN }, Extremum { x: lo, value: i64::MAX });
    let mut next_grid = grid.iter().copied().peekable();
    for (i, &s) in summands.iter().enumerate() {
        v += i64::from(s);
        let n = lo + i as u64;
        if v != 0 {
            let sg = if v > 0 { 1 } else { -1 };
            if sign == 0 {
                st.first_nonzero = Some((n, sg));
            } else if sign != sg {
                st.events.push(n);
            }
            sign = sg;
        }
        if v > max.value {
            max = Extremum { x: n, value: v };
        }
        if v < min.value {
            min = Extremum { x: n, value: v };
        }
        if next_grid.peek() == Some(&n) {
            st.grid.push((n, v));
            next_grid.next();
        }
    }
    if !summands.is_empty() {
        st.max = Some(max);
        st.min = Some(min);
    }
    st.last_sign = sign;
    st.end = v;
    st
}

impl SeriesState {
    fn absorb(&mut self, b: BlockStats) {
        if let Some((n, sg)) = b.first_nonzero {
            if self.sign != 0 && self.sign != sg {
                self.events.push(n);
            }
        }
        self.events.extend(b.events);
        if b.last_sign != 0 {
            self.sign = b.last_sign;
        }
        if let Some(m) = b.max {
            if self.max.is_none_or(|cur| m.value > cur.value) {
                self.max = Some(m);
            }
        }
        if let Some(m) = b.min {
            if self.min.is_none_or(|cur| m.value < cur.value) {
                self.min = Some(m);
            }
        }
        self.checkpoints.extend(b.grid);
        self.sum = b.end;
    }
}

/// A scan of several series in one sieve pass, resumable at block boundaries.
///
/// Blocks are sieved in batches of `workers`: summands and block totals are
/// computed in parallel, offsets are accumulated in block order, then the
/// per-block running-sum statistics run in parallel with those offsets and
/// are merged in block order. Output does not depend on the worker count.
pub struct Scan {
    specs: Vec<SeriesSpec>,
    plans: Vec<Plan>,
    counts: bool,
    cfg: SieveConfig,
    grid: Vec<u64>,
    table: PrimeTable,
    pool: rayon::ThreadPool,
    state: ScanState,
}

impl Scan {
    pub fn new(specs: Vec<SeriesSpec>, cfg: SieveConfig, ratio: f64) -> Result<Self> {
        let state = ScanState {
            modulus: cfg.modulus,
            xmax: cfg.xmax,
            block_size: cfg.block_size,
            ratio,
            next_lo: 1,
            series: specs.iter().map(|s| SeriesState::new(s.label())).collect(),
        };
        Self::resume(state, specs, cfg, ratio)
    }

    /// Continues from a saved state; refuses states that belong to a different scan.
    pub fn resume(state: ScanState, specs: Vec<SeriesSpec>, cfg: SieveConfig, ratio: f64) -> Result<Self> {
        cfg.validate()?;
        let q = cfg.modulus;
        if q > MAX_PARITY_MODULUS {
            return Err(Error::Config(format!(
                "scan modulus {q} exceeds {MAX_PARITY_MODULUS}"
            )));
        }
        if let Some(s) = specs.iter().find(|s| s.sieve_modulus().is_some_and(|m| q % m != 0)) {
            return Err(Error::Config(format!(
                "series {} needs a modulus dividing the sieve modulus {q}",
                s.label()
            )));
        }
        let counts = specs.iter().any(SeriesSpec::needs_counts);
        let per_block = cfg.block_size
            * (16 + specs.len() as u64 + if counts { 2 * q } else { 0 });
        cfg.check_budget(per_block)?;

        let mismatch = |what: &str| Err(Error::Mismatch(what.to_string()));
        if state.modulus != q {
            return mismatch(&format!("checkpoint modulus {} vs {q}", state.modulus));
        }
        if state.xmax != cfg.xmax {
            return mismatch(&format!("checkpoint xmax {} vs {}", state.xmax, cfg.xmax));
        }
        if state.block_size != cfg.block_size {
            return mismatch(&format!(
                "checkpoint block size {} vs {}",
                state.block_size, cfg.block_size
            ));
        }
        if state.ratio.to_bits() != ratio.to_bits() {
            return mismatch(&format!("checkpoint ratio {} vs {ratio}", state.ratio));
        }
        let labels: Vec<&str> = specs.iter().map(SeriesSpec::label).collect();
        let saved: Vec<&str> = state.series.iter().map(|s| s.label.as_str()).collect();
        if labels != saved {
            return mismatch(&format!("checkpoint series {saved:?} vs {labels:?}"));
        }
        if state.next_lo == 0
            || (state.next_lo <= state.xmax && (state.next_lo - 1) % state.block_size != 0)
            || state.next_lo > state.xmax + 1
        {
            return mismatch(&format!("checkpoint position {} is not a block boundary", state.next_lo));
        }

        let plans = specs
            .iter()
            .map(|s| plan_for(s, q))
            .collect::<Result<Vec<_>>>()?;
        let grid = checkpoint_grid(cfg.xmax, ratio)?;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.workers)
            .build()
            .map_err(|e| Error::Config(e.to_string()))?;
        Ok(Self {
            specs,
            plans,
            counts,
            table: PrimeTable::covering(cfg.xmax + 1),
            cfg,
            grid,
            pool,
            state,
        })
    }

    pub fn specs(&self) -> &[SeriesSpec] {
        &self.specs
    }

    pub fn state(&self) -> &ScanState {
        &self.state
    }

    pub fn is_complete(&self) -> bool {
        self.state.is_complete()
    }

    /// Runs to `xmax`.
    pub fn run(&mut self, observer: impl FnMut(&BlockView)) -> Result<()> {
        self.run_until(self.cfg.xmax, observer)
    }

    /// Processes every remaining block starting at or below `stop`, then returns.
    pub fn run_until(&mut self, stop: u64, mut observer: impl FnMut(&BlockView)) -> Result<()> {
        let xmax = self.cfg.xmax;
        let bs = self.cfg.block_size;
        while self.state.next_lo <= xmax.min(stop) {
            let mut batch = Vec::with_capacity(self.cfg.workers);
            let mut lo = self.state.next_lo;
            while batch.len() < self.cfg.workers && lo <= xmax.min(stop) {
                let hi = (lo + bs).min(xmax + 1);
                batch.push((lo, hi));
                lo = hi;
            }
            let summands: Vec<Vec<Vec<i8>>> = self.pool.install(|| {
                batch
                    .par_iter()
                    .map(|&(lo, hi)| self.block_summands(lo, hi))
                    .collect::<Result<_>>()
            })?;

            let nseries = self.specs.len();
            let mut offsets: Vec<Vec<i64>> = Vec::with_capacity(batch.len());
            let mut running: Vec<i64> = self.state.series.iter().map(|s| s.sum).collect();
            for block in &summands {
                offsets.push(running.clone());
                for (k, s) in block.iter().enumerate() {
                    running[k] += s.iter().map(|&v| i64::from(v)).sum::<i64>();
                }
            }

            let grid = &self.grid;
            let stats: Vec<Vec<BlockStats>> = self.pool.install(|| {
                batch
                    .par_iter()
                    .zip(&summands)
                    .zip(&offsets)
                    .map(|((&(lo, hi), block), off)| {
                        let a = grid.partition_point(|&g| g < lo);
                        let b = grid.partition_point(|&g| g < hi);
                        (0..nseries)
                            .map(|k| block_stats(lo, &block[k], off[k], &grid[a..b]))
                            .collect()
                    })
                    .collect()
            });

            for (((&(lo, hi), block), off), st) in batch.iter().zip(&summands).zip(&offsets).zip(stats) {
                for (series, b) in self.state.series.iter_mut().zip(st) {
                    series.absorb(b);
                }
                observer(&BlockView { lo, hi, offsets: off, summands: block });
                self.state.next_lo = hi;
            }
        }
        Ok(())
    }

    fn block_summands(&self, lo: u64, hi: u64) -> Result<Vec<Vec<i8>>> {
        let q = self.cfg.modulus;
        let len = (hi - lo) as usize;
        let mut out = Vec::with_capacity(self.plans.len());
        if self.counts {
            let bc = sieve_block(lo, hi, q, &self.table)?;
            let odd: Vec<u64> = (0..len)
                .map(|i| {
                    bc.mult(i)
                        .iter()
                        .enumerate()
                        .filter(|&(_, &c)| c & 1 == 1)
                        .fold(0u64, |m, (a, _)| m | 1 << a)
                })
                .collect();
            for plan in &self.plans {
                let v = match plan {
                    Plan::Omega { classes, distinct } => (0..len)
                        .map(|i| {
                            let row = if *distinct { bc.distinct(i) } else { bc.mult(i) };
                            classes.iter().map(|&c| row[c] as i8).sum()
                        })
                        .collect(),
                    _ => lambda_summands(plan, lo, &odd),
                };
                out.push(v);
            }
        } else {
            let pb = sieve_parity_block(lo, hi, q, &self.table)?;
            for plan in &self.plans {
                out.push(lambda_summands(plan, lo, pb.odd_masks()));
            }
        }
        Ok(out)
    }

    /// The finished series; fails if the scan has not reached `xmax`.
    pub fn finish(self) -> Result<Vec<SummatorySeries>> {
        if !self.is_complete() {
            return Err(Error::Precondition(format!(
                "scan stopped at {} before xmax {}",
                self.state.next_lo - 1,
                self.cfg.xmax
            )));
        }
        let xmax = self.cfg.xmax;
        Ok(self
            .specs
            .into_iter()
            .zip(self.state.series)
            .map(|(spec, st)| SummatorySeries {
                spec,
                max: st.max.expect("nonempty scan"),
                min: st.min.expect("nonempty scan"),
                final_value: Extremum { x: xmax, value: st.sum },
                checkpoints: st.checkpoints,
                sign_events: st.events,
            })
            .collect())
    }
}

fn plan_for(spec: &SeriesSpec, q: u64) -> Result<Plan> {
    Ok(match spec.kind() {
        SeriesKind::Lambda(rs) => Plan::Lambda(class_mask(rs, q)?),
        SeriesKind::ClassicalLambda => Plan::Lambda(class_mask(&ResidueSet::all(q)?, q)?),
        SeriesKind::ClassicalRestricted(p) => Plan::Restricted {
            mask: class_mask(&ResidueSet::all(q)?, q)?,
            progression: p.clone(),
        },
        SeriesKind::SmallOmega(rs) | SeriesKind::BigOmega(rs) => Plan::Omega {
            classes: (0..q).filter(|&b| rs.contains_class_of(b)).map(|b| b as usize).collect(),
            distinct: matches!(spec.kind(), SeriesKind::SmallOmega(_)),
        },
    })
}

fn lambda_summands(plan: &Plan, lo: u64, odd: &[u64]) -> Vec<i8> {
    let sign = |m: u64, mask: u64| 1 - 2 * ((m & mask).count_ones() & 1) as i8;
    match plan {
        Plan::Lambda(mask) => odd.iter().map(|&m| sign(m, *mask)).collect(),
        Plan::Restricted { mask, progression } => odd
            .iter()
            .enumerate()
            .map(|(i, &m)| {
                if progression.contains_class_of(lo + i as u64) {
                    sign(m, *mask)
                } else {
                    0
                }
            })
            .collect(),
        Plan::Omega { .. } => unreachable!("omega series are built from counts"),
    }
}

/// Scans `specs` to `cfg.xmax` and returns one series per spec.
pub fn scan(specs: &[SeriesSpec], cfg: &SieveConfig, checkpoint_ratio: f64) -> Result<Vec<SummatorySeries>> {
    let mut s = Scan::new(specs.to_vec(), cfg.clone(), checkpoint_ratio)?;
    s.run(|_| {})?;
    s.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith;

    fn lam(q: u64, set: &[u64]) -> SeriesSpec {
        SeriesSpec::lambda(ResidueSet::new(q, set.iter().copied()).unwrap())
    }

    fn cfg(xmax: u64, q: u64) -> SieveConfig {
        SieveConfig::new(xmax, q).unwrap().with_block_size(1024).unwrap()
    }

    /// Running sums straight from the trial-division oracle.
    fn oracle_running(spec: &SeriesSpec, xmax: u64) -> Vec<i64> {
        let mut v = 0i64;
        (1..=xmax)
            .map(|n| {
                v += match spec.kind() {
                    SeriesKind::Lambda(rs) => i64::from(arith::lambda_ap(n, rs).unwrap()),
                    SeriesKind::ClassicalLambda => i64::from(arith::liouville(n).unwrap()),
                    SeriesKind::ClassicalRestricted(p) => {
                        if p.contains_class_of(n) {
                            i64::from(arith::liouville(n).unwrap())
                        } else {
                            0
                        }
                    }
                    SeriesKind::SmallOmega(rs) => i64::from(arith::small_omega_ap(n, rs).unwrap()),
                    SeriesKind::BigOmega(rs) => i64::from(arith::big_omega_ap(n, rs).unwrap()),
                };
                v
            })
            .collect()
    }

    fn oracle_events(values: &[i64]) -> Vec<u64> {
        let mut sign = 0i64;
        let mut out = Vec::new();
        for (i, &v) in values.iter().enumerate() {
            if v != 0 {
                if sign != 0 && sign != v.signum() {
                    out.push(i as u64 + 1);
                }
                sign = v.signum();
            }
        }
        out
    }

    #[test]
    fn spec_examples() {
        let s = scan(&[lam(4, &[3])], &cfg(8, 4), 1.05).unwrap();
        assert_eq!(s[0].final_value.value, 2);
        // λ(1..=10) = 1,-1,-1,1,-1,1,-1,-1,1,1
        let s = scan(&[SeriesSpec::classical()], &cfg(10, 2), 1.05).unwrap();
        assert_eq!(s[0].final_value.value, 0);
        assert_eq!(s[0].min, Extremum { x: 8, value: -2 });
    }

    #[test]
    fn matches_oracle_across_blocks() {
        let xmax = 5000;
        let specs = vec![
            lam(5, &[1, 2]),
            lam(4, &[1]),
            lam(2, &[0]),
            SeriesSpec::classical(),
            SeriesSpec::classical_restricted(ResidueSet::single(4, 1).unwrap()),
            SeriesSpec::small_omega(4, 1).unwrap(),
            SeriesSpec::big_omega(5, 2).unwrap(),
        ];
        let q = SeriesSpec::common_modulus(&specs);
        assert_eq!(q, 20);
        let series = scan(&specs, &cfg(xmax, q), 1.05).unwrap();
        for (spec, s) in specs.iter().zip(&series) {
            let values = oracle_running(spec, xmax);
            assert_eq!(s.final_value.value, values[xmax as usize - 1], "{spec}");
            for &(x, v) in &s.checkpoints {
                assert_eq!(v, values[x as usize - 1], "{spec} at {x}");
            }
            let max = values.iter().copied().max().unwrap();
            let min = values.iter().copied().min().unwrap();
            assert_eq!(s.max.value, max);
            assert_eq!(s.max.x, values.iter().position(|&v| v == max).unwrap() as u64 + 1);
            assert_eq!(s.min.value, min);
            assert_eq!(s.min.x, values.iter().position(|&v| v == min).unwrap() as u64 + 1);
            assert_eq!(s.sign_events, oracle_events(&values), "{spec}");
            assert!(s.checkpoints.iter().all(|&(x, v)| v.unsigned_abs() <= x * 15));
        }
        assert!(!series[0].sign_events.is_empty());
    }

    #[test]
    fn worker_count_and_resume_do_not_change_output() {
        let specs = vec![lam(5, &[1, 2]), lam(4, &[3]), SeriesSpec::classical()];
        let base = scan(&specs, &cfg(20_000, 20), 1.05).unwrap();
        let par = scan(&specs, &cfg(20_000, 20).with_workers(3).unwrap(), 1.05).unwrap();
        assert_eq!(base, par);

        let mut first = Scan::new(specs.clone(), cfg(20_000, 20), 1.05).unwrap();
        first.run_until(9_000, |_| {}).unwrap();
        assert!(!first.is_complete());
        let saved = first.state().clone();
        assert_eq!((saved.next_lo - 1) % 1024, 0);
        let mut resumed = Scan::resume(saved, specs.clone(), cfg(20_000, 20), 1.05).unwrap();
        resumed.run(|_| {}).unwrap();
        assert_eq!(resumed.finish().unwrap(), base);
    }

    #[test]
    fn resume_guards() {
        let specs = vec![lam(4, &[3])];
        let mut s = Scan::new(specs.clone(), cfg(5000, 4), 1.05).unwrap();
        s.run_until(2000, |_| {}).unwrap();
        let st = s.state().clone();
        assert!(matches!(
            Scan::resume(st.clone(), specs.clone(), cfg(5000, 8), 1.05),
            Err(Error::Mismatch(_))
        ));
        assert!(matches!(
            Scan::resume(st.clone(), vec![lam(4, &[1])], cfg(5000, 4), 1.05),
            Err(Error::Mismatch(_))
        ));
        assert!(matches!(
            Scan::resume(st.clone(), specs.clone(), cfg(6000, 4), 1.05),
            Err(Error::Mismatch(_))
        ));
        let mut bad = st;
        bad.next_lo += 1;
        assert!(Scan::resume(bad, specs, cfg(5000, 4), 1.05).is_err());
    }

    #[test]
    fn observer_sees_every_block_in_order() {
        let specs = vec![lam(4, &[1])];
        let mut s = Scan::new(specs, cfg(3000, 4).with_workers(2).unwrap(), 1.05).unwrap();
        let mut seen = Vec::new();
        s.run(|b| seen.extend(b.running(0))).unwrap();
        let oracle = oracle_running(&lam(4, &[1]), 3000);
        assert_eq!(seen.len(), 3000);
        assert!(seen.iter().all(|&(n, v)| v == oracle[n as usize - 1]));
    }

    #[test]
    fn config_errors() {
        assert!(Scan::new(vec![lam(5, &[1])], cfg(100, 4), 1.05).is_err());
        let tight = cfg(100_000, 4).with_memory_budget(1000);
        assert!(matches!(Scan::new(vec![lam(4, &[1])], tight, 1.05), Err(Error::Config(_))));
        let wide = SieveConfig::new(100, 70).unwrap();
        assert!(Scan::new(vec![lam(70, &[1])], wide, 1.05).is_err());
    }
}
