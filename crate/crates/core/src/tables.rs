//! Exact distance-law tables `N_d = #{r : d(r, e) = d}` for `n <= 20`.
//!
//! The counts come from the permanent of the `n×n` matrix with entries
//! `x^(i·j)`: expanding it gives `Σ_σ x^(Σ_i i·σ(i))`, and since
//! `d(σ, e) = 2(c_n − Σ_i i·σ(i))` each coefficient is one `N_d`.
//! The permanent is computed with Ryser's inclusion–exclusion formula at
//! `C(n+1,3) + 1` integer points modulo the Mersenne prime `2^61 − 1`,
//! then the coefficients are recovered by Newton interpolation. Every
//! `N_d <= n! < 2^62`, and a table is only accepted when its counts sum to
//! exactly `n!`, which rules out any residue that wrapped.
//!
//! The tables for `n <= 20` are generated offline into
//! `data/spearman_exact.txt` and embedded in the binary.

use std::fmt::Write as _;
use std::sync::OnceLock;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::numeric::{binomial, factorial_u128};

/// Largest `n` with an exact table.
pub const MAX_EXACT_N: usize = 20;

/// Exact counts for one `n`: `counts[k]` is `N_d` at `d = 2k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactTable {
    pub n: usize,
    pub counts: Vec<u64>,
}

impl ExactTable {
    pub fn distances(&self) -> impl Iterator<Item = u64> + '_ {
        (0..self.counts.len() as u64).map(|k| 2 * k)
    }
}

const P: u64 = (1 << 61) - 1;

#[inline]
fn add(a: u64, b: u64) -> u64 {
    let s = a + b;
    if s >= P { s - P } else { s }
}

#[inline]
fn sub(a: u64, b: u64) -> u64 {
    if a >= b { a - b } else { a + P - b }
}

#[inline]
fn mul(a: u64, b: u64) -> u64 {
    let z = a as u128 * b as u128;
    let r = ((z as u64) & P) + ((z >> 61) as u64);
    if r >= P { r - P } else { r }
}

fn pow(mut a: u64, mut e: u64) -> u64 {
    let mut acc = 1;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul(acc, a);
        }
        a = mul(a, a);
        e >>= 1;
    }
    acc
}

fn inv(a: u64) -> u64 {
    pow(a, P - 2)
}

/// Permanent of `a` (row-major `n×n`) mod `P`, Ryser formula with Gray-code updates.
fn permanent_mod(a: &[u64], n: usize) -> u64 {
    let mut row_sums = vec![0u64; n];
    let mut total = 0u64;
    let mut gray = 0u64;
    for k in 1u64..(1 << n) {
        let next = k ^ (k >> 1);
        let col = (gray ^ next).trailing_zeros() as usize;
        let adding = next & (1 << col) != 0;
        gray = next;
        let mut prod = 1u64;
        for (i, s) in row_sums.iter_mut().enumerate() {
            let v = a[i * n + col];
            *s = if adding { add(*s, v) } else { sub(*s, v) };
            prod = mul(prod, *s);
        }
        // sign (-1)^(n - |S|)
        if (n as u32 - gray.count_ones()) % 2 == 0 {
            total = add(total, prod);
        } else {
            total = sub(total, prod);
        }
    }
    total
}

/// Counts by direct enumeration of all `n!` permutations (small `n` only).
pub fn enumerate_counts(n: usize) -> Vec<u64> {
    let len = binomial(n as u64 + 1, 3) as usize + 1;
    let mut counts = vec![0u64; len];
    let mut perm: Vec<usize> = (1..=n).collect();
    let mut c = vec![0usize; n];
    let dist = |p: &[usize]| -> usize {
        p.iter().enumerate().map(|(i, &r)| (i + 1).abs_diff(r).pow(2)).sum()
    };
    counts[dist(&perm) / 2] += 1;
    // Heap's algorithm
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            counts[dist(&perm) / 2] += 1;
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    counts
}

/// Computes the exact table for `2 <= n <= 20`.
pub fn generate_exact_table(n: usize) -> Result<ExactTable> {
    if !(2..=MAX_EXACT_N).contains(&n) {
        return Err(Error::Table(format!("exact tables are supported for 2 <= n <= {MAX_EXACT_N}, got {n}")));
    }
    let degree = binomial(n as u64 + 1, 3) as usize;
    let s_min: u64 = (1..=n as u64).map(|i| i * (n as u64 + 1 - i)).sum();
    let s_max: u64 = (1..=n as u64).map(|i| i * i).sum();
    debug_assert_eq!((s_max - s_min) as usize, degree);

    // Q(x) = perm[x^(ij)] / x^s_min has degree `degree`.
    let points: Vec<u64> = (1..=degree as u64 + 1).collect();
    let values: Vec<u64> = points
        .iter()
        .map(|&x| {
            let mut a = vec![0u64; n * n];
            for i in 0..n {
                for j in 0..n {
                    a[i * n + j] = pow(x, ((i + 1) * (j + 1)) as u64);
                }
            }
            mul(permanent_mod(&a, n), inv(pow(x, s_min)))
        })
        .collect();

    let coeffs = interpolate(&points, &values);
    // coefficient of x^(S - s_min); d = 2(s_max - S) so reverse for ascending d
    let mut counts: Vec<u64> = coeffs.into_iter().rev().collect();
    counts.truncate(degree + 1);

    let total: u128 = counts.iter().map(|&c| c as u128).sum();
    if Some(total) != factorial_u128(n) {
        return Err(Error::Table(format!("counts for n = {n} do not sum to n!")));
    }
    if n <= 10 && counts != enumerate_counts(n) {
        return Err(Error::Table(format!("counts for n = {n} disagree with enumeration")));
    }
    Ok(ExactTable { n, counts })
}

/// Newton interpolation mod `P`; returns monomial coefficients, lowest degree first.
fn interpolate(xs: &[u64], ys: &[u64]) -> Vec<u64> {
    let m = xs.len();
    let mut dd = ys.to_vec();
    for level in 1..m {
        for i in (level..m).rev() {
            let num = sub(dd[i], dd[i - 1]);
            let den = sub(xs[i], xs[i - level]);
            dd[i] = mul(num, inv(den));
        }
    }
    // Horner on the Newton form
    let mut poly = vec![0u64; m];
    for k in (0..m).rev() {
        // poly = poly * (x - xs[k]) + dd[k]
        let mut next = vec![0u64; m];
        for d in 0..m - 1 {
            next[d + 1] = add(next[d + 1], poly[d]);
            next[d] = sub(next[d], mul(poly[d], xs[k]));
        }
        next[0] = add(next[0], dd[k]);
        poly = next;
    }
    poly
}

/// Serializes tables: per `n` a header `n <n> <points>`, then `<d> <N_d>` lines;
/// a trailing `checksum <sha256>` covers all preceding bytes.
pub fn write_tables(tables: &[ExactTable]) -> String {
    let mut body = String::new();
    for t in tables {
        writeln!(body, "n {} {}", t.n, t.counts.len()).unwrap();
        for (d, c) in t.distances().zip(&t.counts) {
            writeln!(body, "{d} {c}").unwrap();
        }
    }
    let digest = Sha256::digest(body.as_bytes());
    let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
    body.push_str(&format!("checksum {hex}\n"));
    body
}

pub fn parse_tables(text: &str) -> Result<Vec<ExactTable>> {
    let Some(pos) = text.rfind("checksum ") else {
        return Err(Error::Table("missing checksum line".into()));
    };
    let (body, tail) = text.split_at(pos);
    let want = tail.trim_start_matches("checksum ").trim();
    let digest = Sha256::digest(body.as_bytes());
    let got: String = digest.iter().map(|b| format!("{b:02x}")).collect();
    if got != want {
        return Err(Error::Table("checksum mismatch".into()));
    }

    let bad = |line: usize, what: &str| Error::Table(format!("line {}: {what}", line + 1));
    let mut tables = Vec::new();
    let mut lines = body.lines().enumerate();
    while let Some((ln, header)) = lines.next() {
        let parts: Vec<&str> = header.split_whitespace().collect();
        let [tag, n, len] = parts[..] else { return Err(bad(ln, "bad header")) };
        if tag != "n" {
            return Err(bad(ln, "expected table header"));
        }
        let n: usize = n.parse().map_err(|_| bad(ln, "bad n"))?;
        let len: usize = len.parse().map_err(|_| bad(ln, "bad point count"))?;
        let mut counts = Vec::with_capacity(len);
        for k in 0..len {
            let (ln, line) = lines.next().ok_or_else(|| bad(ln, "truncated table"))?;
            let mut it = line.split_whitespace();
            let d: u64 = it.next().and_then(|x| x.parse().ok()).ok_or_else(|| bad(ln, "bad distance"))?;
            let c: u64 = it.next().and_then(|x| x.parse().ok()).ok_or_else(|| bad(ln, "bad count"))?;
            if d != 2 * k as u64 {
                return Err(bad(ln, "distances must be consecutive even values"));
            }
            counts.push(c);
        }
        tables.push(ExactTable { n, counts });
    }
    Ok(tables)
}

static EMBEDDED_TEXT: &str = include_str!("../data/spearman_exact.txt");

fn embedded() -> &'static [ExactTable] {
    static TABLES: OnceLock<Vec<ExactTable>> = OnceLock::new();
    TABLES.get_or_init(|| parse_tables(EMBEDDED_TEXT).expect("embedded distance tables are corrupt"))
}

/// The embedded exact table for `n`, if `2 <= n <= 20`.
pub fn exact_table(n: usize) -> Option<&'static ExactTable> {
    embedded().iter().find(|t| t.n == n)
}
