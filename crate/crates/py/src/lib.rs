use pyo3::prelude::*;

#[pymodule]
fn mrba(_m: &Bound<'_, PyModule>) -> PyResult<()> {
    Ok(())
}
