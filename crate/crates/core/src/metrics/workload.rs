use crate::orchestrator::VariantRecord;

/// W: total manually edited lines over a strategy's records.
pub fn edit_workload<'a, I>(records: I) -> usize
where
    I: IntoIterator<Item = &'a VariantRecord>,
{
    records.into_iter().map(|r| r.edit_lines).sum()
}

/// H: total human debugging hours over a strategy's records.
pub fn man_hours_total<'a, I>(records: I) -> f64
where
    I: IntoIterator<Item = &'a VariantRecord>,
{
    records.into_iter().map(|r| r.man_hours).sum()
}
