//! Dense univariate polynomials over F_q, lowest degree first.
//!
//! Only what root and binomial-divisor discovery need: division, gcd,
//! modular powering and Cantor–Zassenhaus splitting. The zero polynomial is
//! the empty vector.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::field::PrimeModulus;

pub type Poly = Vec<u64>;

pub fn trim(p: &mut Poly) {
    while p.last() == Some(&0) {
        p.pop();
    }
}

pub fn degree(p: &[u64]) -> Option<usize> {
    p.iter().rposition(|&c| c != 0)
}

pub fn sub(m: PrimeModulus, x: &[u64], y: &[u64]) -> Poly {
    let mut out = vec![0; x.len().max(y.len())];
    for (i, o) in out.iter_mut().enumerate() {
        let a = x.get(i).copied().unwrap_or(0);
        let b = y.get(i).copied().unwrap_or(0);
        *o = m.sub(a, b);
    }
    trim(&mut out);
    out
}

pub fn mul(m: PrimeModulus, x: &[u64], y: &[u64]) -> Poly {
    if x.is_empty() || y.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0; x.len() + y.len() - 1];
    for (i, &a) in x.iter().enumerate() {
        if a == 0 {
            continue;
        }
        for (j, &b) in y.iter().enumerate() {
            out[i + j] = m.add(out[i + j], m.mul(a, b));
        }
    }
    trim(&mut out);
    out
}

/// Quotient and remainder. Panics on a zero divisor.
pub fn divrem(m: PrimeModulus, x: &[u64], d: &[u64]) -> (Poly, Poly) {
    let dd = degree(d).expect("division by the zero polynomial");
    let lead_inv = m.inv(d[dd]).expect("nonzero leading coefficient");
    let mut r: Poly = x.to_vec();
    trim(&mut r);
    if r.len() <= dd {
        return (Vec::new(), r);
    }
    let mut quo = vec![0; r.len() - dd];
    for i in (dd..r.len()).rev() {
        let c = m.mul(r[i], lead_inv);
        if c == 0 {
            continue;
        }
        quo[i - dd] = c;
        for j in 0..=dd {
            r[i - dd + j] = m.sub(r[i - dd + j], m.mul(c, d[j]));
        }
    }
    r.truncate(dd);
    trim(&mut r);
    trim(&mut quo);
    (quo, r)
}

pub fn rem(m: PrimeModulus, x: &[u64], d: &[u64]) -> Poly {
    divrem(m, x, d).1
}

pub fn make_monic(m: PrimeModulus, p: &mut Poly) {
    trim(p);
    if let Some(&lead) = p.last() {
        let inv = m.inv(lead).expect("nonzero");
        for c in p.iter_mut() {
            *c = m.mul(*c, inv);
        }
    }
}

/// Monic gcd (empty when both inputs are zero).
pub fn gcd(m: PrimeModulus, x: &[u64], y: &[u64]) -> Poly {
    let mut a: Poly = x.to_vec();
    let mut b: Poly = y.to_vec();
    trim(&mut a);
    trim(&mut b);
    while !b.is_empty() {
        let r = rem(m, &a, &b);
        a = b;
        b = r;
    }
    make_monic(m, &mut a);
    a
}

/// base^exp mod modulus.
pub fn powmod(m: PrimeModulus, base: &[u64], mut exp: u64, modulus: &[u64]) -> Poly {
    let mut acc = rem(m, &[1], modulus);
    let mut b = rem(m, base, modulus);
    while exp > 0 {
        if exp & 1 == 1 {
            acc = rem(m, &mul(m, &acc, &b), modulus);
        }
        b = rem(m, &mul(m, &b, &b), modulus);
        exp >>= 1;
    }
    acc
}

/// Splits a squarefree monic `g` whose irreducible factors all have degree
/// `d` into those factors. Requires odd q.
pub fn equal_degree_split(m: PrimeModulus, g: &[u64], d: usize, rng: &mut ChaCha8Rng) -> Vec<Poly> {
    let deg = degree(g).unwrap_or(0);
    if deg == 0 {
        return Vec::new();
    }
    if deg == d {
        return vec![g.to_vec()];
    }
    let q = m.value();
    loop {
        let h: Poly = (0..deg).map(|_| rng.random_range(0..q)).collect();
        if degree(&h).unwrap_or(0) == 0 {
            continue;
        }
        // h^{(q^d-1)/2} = prod_i (h^{(q-1)/2})^{q^i}
        let mut u = powmod(m, &h, (q - 1) / 2, g);
        let mut t = u.clone();
        for _ in 1..d {
            u = powmod(m, &u, q, g);
            t = rem(m, &mul(m, &t, &u), g);
        }
        let cand = gcd(m, &sub(m, &t, &[1]), g);
        let cd = degree(&cand).unwrap_or(0);
        if cd > 0 && cd < deg {
            let (other, _) = divrem(m, g, &cand);
            let mut out = equal_degree_split(m, &cand, d, rng);
            let mut other = other;
            make_monic(m, &mut other);
            out.extend(equal_degree_split(m, &other, d, rng));
            return out;
        }
    }
}

/// Irreducible factors of `f` of degree exactly `n` (distinct, monic),
/// via distinct-degree then equal-degree factorisation. Deterministic.
pub fn factors_of_degree(m: PrimeModulus, f: &[u64], n: usize) -> Vec<Poly> {
    let mut g: Poly = f.to_vec();
    make_monic(m, &mut g);
    let x: Poly = vec![0, 1];
    let mut frob = rem(m, &x, &g);
    for d in 1..=n {
        if degree(&g).unwrap_or(0) < d {
            return Vec::new();
        }
        frob = powmod(m, &frob, m.value(), &g);
        let h = gcd(m, &sub(m, &frob, &x), &g);
        if d == n {
            let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
            let mut out = equal_degree_split(m, &h, n, &mut rng);
            out.sort();
            return out;
        }
        if degree(&h).unwrap_or(0) > 0 {
            // strip every copy of the lower-degree factors
            let mut hh = h;
            loop {
                let (quo, r) = divrem(m, &g, &hh);
                debug_assert!(r.is_empty());
                g = quo;
                hh = gcd(m, &g, &hh);
                if degree(&hh).unwrap_or(0) == 0 {
                    break;
                }
            }
            frob = rem(m, &frob, &g);
        }
    }
    Vec::new()
}
