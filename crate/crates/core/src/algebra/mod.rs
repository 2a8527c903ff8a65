//! Structure-constant tables, the right Leibniz identity, lower central
//! series and the shipped catalog.

mod catalog;
mod lcs;
mod residual;
mod table;

pub use catalog::{
    default_data_dir, load_catalog, load_errata, parse_catalog, parse_errata, Catalog, DataSet,
    ErrataEntry, Reading, DATA_DIR_ENV,
};
pub use lcs::{is_nilpotent, lower_central_series};
pub use residual::{first_leibniz_failure, leibniz_residual, ResidualTensor};
pub use table::{combined_bracket, Admissible, AlgebraTable, ParamSpec, Structure, SAMPLE_VALUES};
