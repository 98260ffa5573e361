//! Independent normal-equations least-squares solve.

/// Solves `(XᵀX) β = Xᵀy` by Gaussian elimination with partial pivoting.
/// Columns are scaled to unit norm first and the Gramian is accumulated in
/// double-double arithmetic so the oracle stays accurate even though the
/// normal equations square the condition number.
pub fn normal_equations(rows: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
    let p = rows[0].len();
    let scale: Vec<f64> = (0..p)
        .map(|j| rows.iter().map(|r| r[j] * r[j]).sum::<f64>().sqrt())
        .collect();
    let mut g = vec![vec![Dd::ZERO; p + 1]; p];
    for (r, yi) in rows.iter().zip(y) {
        for i in 0..p {
            let xi = r[i] / scale[i];
            for j in 0..p {
                g[i][j] = g[i][j].add(Dd::mul(xi, r[j] / scale[j]));
            }
            g[i][p] = g[i][p].add(Dd::mul(xi, *yi));
        }
    }
    for k in 0..p {
        let piv = (k..p)
            .max_by(|&a, &b| g[a][k].hi.abs().total_cmp(&g[b][k].hi.abs()))
            .unwrap();
        g.swap(k, piv);
        for i in k + 1..p {
            let m = g[i][k].div(g[k][k]);
            for j in k..=p {
                let t = m.mul_dd(g[k][j]);
                g[i][j] = g[i][j].sub(t);
            }
        }
    }
    let mut beta = vec![Dd::ZERO; p];
    for k in (0..p).rev() {
        let mut s = g[k][p];
        for j in k + 1..p {
            s = s.sub(g[k][j].mul_dd(beta[j]));
        }
        beta[k] = s.div(g[k][k]);
    }
    beta.iter().zip(&scale).map(|(b, s)| b.hi / s).collect()
}

/// Unevaluated sum `hi + lo` with roughly 106 significant bits.
#[derive(Clone, Copy, Debug)]
struct Dd {
    hi: f64,
    lo: f64,
}

impl Dd {
    const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };

    fn two_sum(a: f64, b: f64) -> Dd {
        let s = a + b;
        let bb = s - a;
        Dd {
            hi: s,
            lo: (a - (s - bb)) + (b - bb),
        }
    }

    fn mul(a: f64, b: f64) -> Dd {
        let p = a * b;
        Dd {
            hi: p,
            lo: a.mul_add(b, -p),
        }
    }

    fn add(self, o: Dd) -> Dd {
        let s = Dd::two_sum(self.hi, o.hi);
        let lo = s.lo + self.lo + o.lo;
        Dd::two_sum(s.hi, lo)
    }

    fn sub(self, o: Dd) -> Dd {
        self.add(Dd { hi: -o.hi, lo: -o.lo })
    }

    fn mul_dd(self, o: Dd) -> Dd {
        let p = Dd::mul(self.hi, o.hi);
        let lo = p.lo + self.hi * o.lo + self.lo * o.hi;
        Dd::two_sum(p.hi, lo)
    }

    fn div(self, o: Dd) -> Dd {
        let q1 = self.hi / o.hi;
        let r = self.sub(o.mul_dd(Dd { hi: q1, lo: 0.0 }));
        let q2 = r.hi / o.hi;
        let r = r.sub(o.mul_dd(Dd { hi: q2, lo: 0.0 }));
        let q3 = r.hi / o.hi;
        Dd::two_sum(q1, q2).add(Dd { hi: q3, lo: 0.0 })
    }
}
