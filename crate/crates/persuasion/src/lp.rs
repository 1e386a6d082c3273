//! Small exact linear programs: dense two-phase simplex over rationals with
//! Bland's rule (no cycling).

use num::{BigRational, Signed, Zero};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LpOutcome {
    Optimal { value: BigRational, x: Vec<BigRational> },
    Infeasible,
    Unbounded,
}

impl LpOutcome {
    pub fn value(&self) -> Option<&BigRational> {
        match self {
            LpOutcome::Optimal { value, .. } => Some(value),
            _ => None,
        }
    }
}

/// Variables are non-negative.
#[derive(Clone, Debug, Default)]
pub struct LinearProgram {
    vars: usize,
    rows: Vec<(Vec<BigRational>, Relation, BigRational)>,
}

struct Tableau {
    // Constraint rows; the last entry of each row is the right-hand side.
    rows: Vec<Vec<BigRational>>,
    basis: Vec<usize>,
}

impl Tableau {
    fn pivot(&mut self, obj: &mut [BigRational], r: usize, c: usize) {
        let p = self.rows[r][c].clone();
        for v in self.rows[r].iter_mut() {
            *v = &*v / &p;
        }
        let pivot_row = self.rows[r].clone();
        for (k, row) in self.rows.iter_mut().enumerate() {
            if k != r && !row[c].is_zero() {
                let factor = row[c].clone();
                for (v, pv) in row.iter_mut().zip(&pivot_row) {
                    *v -= &factor * pv;
                }
            }
        }
        if !obj[c].is_zero() {
            let factor = obj[c].clone();
            for (v, pv) in obj.iter_mut().zip(&pivot_row) {
                *v -= &factor * pv;
            }
        }
        self.basis[r] = c;
    }

    /// Maximizes with reduced costs in `obj` (entry `j` is minus the reduced
    /// profit of column `j`; the last entry is minus the objective value).
    /// Returns false when unbounded.
    fn run(&mut self, obj: &mut [BigRational], allowed: &[bool]) -> bool {
        loop {
            let entering = (0..allowed.len()).find(|&j| allowed[j] && obj[j].is_negative());
            let Some(c) = entering else {
                return true;
            };
            let rhs = obj.len() - 1;
            let mut best: Option<(BigRational, usize)> = None;
            for (r, row) in self.rows.iter().enumerate() {
                if row[c].is_positive() {
                    let ratio = &row[rhs] / &row[c];
                    let better = match &best {
                        None => true,
                        Some((b, br)) => ratio < *b || (ratio == *b && self.basis[r] < self.basis[*br]),
                    };
                    if better {
                        best = Some((ratio, r));
                    }
                }
            }
            let Some((_, r)) = best else {
                return false;
            };
            self.pivot(obj, r, c);
        }
    }
}

impl LinearProgram {
    pub fn new(vars: usize) -> Self {
        LinearProgram { vars, rows: Vec::new() }
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn add(&mut self, coeffs: Vec<BigRational>, relation: Relation, rhs: BigRational) {
        assert_eq!(coeffs.len(), self.vars, "constraint width");
        self.rows.push((coeffs, relation, rhs));
    }

    /// Adds `x[var] = value`.
    pub fn fix(&mut self, var: usize, value: BigRational) {
        let mut coeffs = vec![BigRational::zero(); self.vars];
        coeffs[var] = BigRational::from_integer(1.into());
        self.add(coeffs, Relation::Eq, value);
    }

    pub fn minimize(&self, objective: &[BigRational]) -> LpOutcome {
        let negated: Vec<BigRational> = objective.iter().map(|c| -c).collect();
        match self.maximize(&negated) {
            LpOutcome::Optimal { value, x } => LpOutcome::Optimal { value: -value, x },
            other => other,
        }
    }

    pub fn maximize(&self, objective: &[BigRational]) -> LpOutcome {
        assert_eq!(objective.len(), self.vars, "objective width");
        let zero = BigRational::zero;
        let one = || BigRational::from_integer(1.into());
        // Normalize to non-negative right-hand sides.
        let rows: Vec<(Vec<BigRational>, Relation, BigRational)> = self
            .rows
            .iter()
            .map(|(coeffs, relation, rhs)| {
                if rhs.is_negative() {
                    let flipped = match relation {
                        Relation::Le => Relation::Ge,
                        Relation::Ge => Relation::Le,
                        Relation::Eq => Relation::Eq,
                    };
                    (coeffs.iter().map(|c| -c).collect(), flipped, -rhs)
                } else {
                    (coeffs.clone(), *relation, rhs.clone())
                }
            })
            .collect();
        let slack_count = rows.iter().filter(|r| r.1 != Relation::Eq).count();
        let artificial_count = rows.iter().filter(|r| r.1 != Relation::Le).count();
        let first_slack = self.vars;
        let first_artificial = first_slack + slack_count;
        let width = first_artificial + artificial_count;

        let mut tableau = Tableau {
            rows: Vec::with_capacity(rows.len()),
            basis: Vec::with_capacity(rows.len()),
        };
        let (mut slack, mut artificial) = (first_slack, first_artificial);
        for (coeffs, relation, rhs) in rows {
            let mut row = coeffs;
            row.resize(width + 1, zero());
            row[width] = rhs;
            match relation {
                Relation::Le => {
                    row[slack] = one();
                    tableau.basis.push(slack);
                    slack += 1;
                }
                Relation::Ge => {
                    row[slack] = -one();
                    slack += 1;
                    row[artificial] = one();
                    tableau.basis.push(artificial);
                    artificial += 1;
                }
                Relation::Eq => {
                    row[artificial] = one();
                    tableau.basis.push(artificial);
                    artificial += 1;
                }
            }
            tableau.rows.push(row);
        }

        // Phase 1: maximize minus the sum of artificial variables.
        let mut obj = vec![zero(); width + 1];
        obj[first_artificial..width].fill(one());
        for (r, &b) in tableau.basis.clone().iter().enumerate() {
            if b >= first_artificial {
                for (v, rv) in obj.iter_mut().zip(&tableau.rows[r]) {
                    *v -= rv;
                }
            }
        }
        let all = vec![true; width];
        tableau.run(&mut obj, &all);
        if obj[width].is_negative() {
            return LpOutcome::Infeasible;
        }
        // Drive remaining (zero-level) artificial variables out of the basis.
        let mut r = 0;
        while r < tableau.rows.len() {
            if tableau.basis[r] >= first_artificial {
                match (0..first_artificial).find(|&j| !tableau.rows[r][j].is_zero()) {
                    Some(c) => tableau.pivot(&mut obj, r, c),
                    None => {
                        tableau.rows.remove(r);
                        tableau.basis.remove(r);
                        continue;
                    }
                }
            }
            r += 1;
        }

        // Phase 2.
        let mut obj = vec![zero(); width + 1];
        for (v, c) in obj.iter_mut().zip(objective) {
            *v = -c;
        }
        for (r, &b) in tableau.basis.iter().enumerate() {
            if !obj[b].is_zero() {
                let factor = obj[b].clone();
                for (v, rv) in obj.iter_mut().zip(&tableau.rows[r]) {
                    *v -= &factor * rv;
                }
            }
        }
        let allowed: Vec<bool> = (0..width).map(|j| j < first_artificial).collect();
        if !tableau.run(&mut obj, &allowed) {
            return LpOutcome::Unbounded;
        }
        let mut x = vec![zero(); self.vars];
        for (r, &b) in tableau.basis.iter().enumerate() {
            if b < self.vars {
                x[b] = tableau.rows[r][width].clone();
            }
        }
        LpOutcome::Optimal {
            value: obj[width].clone(),
            x,
        }
    }
}
