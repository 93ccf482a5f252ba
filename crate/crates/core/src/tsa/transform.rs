use super::StatsError;
use crate::scalar::Real;
use crate::series::{ensure_aligned, WeeklySeries};

/// First-order difference; element `k` is `s[k + 1] - s[k]` and is dated to
/// week `k + 1`. A missing value makes both adjacent differences missing.
pub fn difference<T: Real>(s: &WeeklySeries<T>) -> Result<WeeklySeries<T>, StatsError> {
    if s.len() < 2 {
        return Err(StatsError::TooShort { needed: 2, got: s.len() });
    }
    let values = s
        .values
        .windows(2)
        .map(|w| match (w[0], w[1]) {
            (Some(a), Some(b)) => Some(b - a),
            _ => None,
        })
        .collect();
    Ok(WeeklySeries { start_week: s.week_start(1), values, label: format!("diff({})", s.label) })
}

/// Week-by-week ratio of a sub-count to its total; weeks with a zero total
/// are missing.
pub fn fraction_series<T: Real>(
    numerator: &WeeklySeries<T>,
    denominator: &WeeklySeries<T>,
) -> Result<WeeklySeries<T>, StatsError> {
    ensure_aligned(numerator, denominator)?;
    let mut values = Vec::with_capacity(numerator.len());
    for (k, (n, d)) in numerator.values.iter().zip(&denominator.values).enumerate() {
        values.push(match (*n, *d) {
            (Some(n), Some(d)) => {
                if n > d {
                    return Err(StatsError::SubsetViolation { week: numerator.week_start(k) });
                }
                (d > T::zero()).then(|| n / d)
            }
            _ => None,
        });
    }
    Ok(WeeklySeries {
        start_week: numerator.start_week,
        values,
        label: format!("{}/{}", numerator.label, denominator.label),
    })
}
