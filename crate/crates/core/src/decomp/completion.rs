//! The trailing p-potent block `K` of the main-lemma assembly.

use crate::canonical::CompanionSpec;
use crate::field::FieldElement;
use crate::matf::Matrix;

use super::DecompError;

/// Largest free-block enumeration attempted for `k >= 3`.
pub const COMPLETION_SEARCH_CAP: u64 = 10_000_000;

/// Finds `K` (k×k, `k = cd.n()`) with `K^p = K`, first column zero, last row
/// `(0, …, 0, a)` and `(a·I − Cd) − K` nilpotent.
///
/// For `k = 2` the solution is closed-form and exists exactly when `a = l`;
/// larger `k` are searched over the `(k−1)²` free entries in lexicographic
/// order with the trace constraint fixing the last free diagonal entry.
pub fn trailing_p_potent_completion(
    cd: &CompanionSpec,
    a: &FieldElement,
    l: &FieldElement,
) -> Result<Matrix, DecompError> {
    let f = cd.field().clone();
    let k = cd.n();
    if a.is_zero() || f.prime_subfield_index(a).is_none() {
        return Err(DecompError::PreconditionViolated(
            "completion scalar must be a nonzero multiple of unity".into(),
        ));
    }
    if cd.trace() != *l {
        return Err(DecompError::PreconditionViolated(format!(
            "trailing companion has trace {} but l = {}",
            f.format_element(&cd.trace()),
            f.format_element(l)
        )));
    }
    let q = cd.realize().neg().add_scalar(a);
    let accept = |kmat: &Matrix| -> bool {
        kmat.is_p_potent() && q.sub(kmat).is_ok_and(|t| t.is_nilpotent())
    };
    match k {
        // first column zero and last row (a) cannot both hold
        1 => Err(DecompError::CompletionFailed("k = 1 leaves no room for K".into())),
        2 => {
            if a != l {
                return Err(DecompError::CompletionFailed(format!(
                    "k = 2 needs a = l (a = {}, l = {})",
                    f.format_element(a),
                    f.format_element(l)
                )));
            }
            let d = cd.coeffs();
            let x = f.add(&d[0], &f.mul(a, &d[1]));
            let kmat = Matrix::from_fn(f.clone(), 2, 2, |i, j| match (i, j) {
                (0, 1) => Some(x.clone()),
                (1, 1) => Some(a.clone()),
                _ => None,
            });
            if accept(&kmat) {
                Ok(kmat)
            } else {
                Err(DecompError::CompletionFailed("closed form failed verification".into()))
            }
        }
        _ => {
            let free = (k - 1) * (k - 1);
            let qsize = f.order();
            let space = qsize.checked_pow(free as u32 - 1).unwrap_or(u64::MAX);
            if space > COMPLETION_SEARCH_CAP {
                return Err(DecompError::CompletionFailed(format!(
                    "search space {qsize}^{} exceeds cap",
                    free - 1
                )));
            }
            // trace(K) must equal trace(Q) for Q - K to be nilpotent
            let target = f.sub(&q.trace(), a);
            let mut digits = vec![0u64; free];
            for _ in 0..space {
                let mut vals: Vec<FieldElement> = digits.iter().map(|&d| f.from_index(d)).collect();
                // free block is rows 0..k-1, cols 1..k; its diagonal entries sit at
                // (i, i) for i in 1..k-1, i.e. flat index (i * (k-1) + i - 1)
                let diag_idx: Vec<usize> = (1..k - 1).map(|i| i * (k - 1) + i - 1).collect();
                let last = *diag_idx.last().unwrap();
                let partial = diag_idx[..diag_idx.len() - 1]
                    .iter()
                    .fold(f.zero(), |acc, &i| f.add(&acc, &vals[i]));
                vals[last] = f.sub(&target, &partial);
                let kmat = Matrix::from_fn(f.clone(), k, k, |i, j| {
                    if i == k - 1 {
                        (j == k - 1).then(|| a.clone())
                    } else if j == 0 {
                        None
                    } else {
                        Some(vals[i * (k - 1) + j - 1].clone())
                    }
                });
                if accept(&kmat) {
                    return Ok(kmat);
                }
                // odometer over every free slot except the trace-determined one
                for pos in (0..free).rev() {
                    if pos == last {
                        continue;
                    }
                    digits[pos] += 1;
                    if digits[pos] < qsize {
                        break;
                    }
                    digits[pos] = 0;
                }
            }
            Err(DecompError::CompletionFailed(format!("no K exists for k = {k}")))
        }
    }
}
