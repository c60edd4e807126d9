//! Library surface of the `strongdiv` binary: the module file format and
//! the report renderers, exposed for integration tests and for embedding.

pub mod format;
pub mod report_out;
