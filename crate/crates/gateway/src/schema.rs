use crate::api::{
    ApiIndex, BanEntries, BuyableList, ExpandResponse, JobAccepted, JobList, JobResult, LoggingSummary, SchemaList,
    Status, UploadResponse,
};
use crate::error::ErrorBody;
use schemars::schema_for;
use serde_json::Value;
use std::collections::BTreeMap;

/// Every published response schema by name. `Error` covers all non-2xx
/// bodies.
pub fn schemas() -> BTreeMap<&'static str, Value> {
    let mut m = BTreeMap::new();
    let mut add = |name, schema: schemars::Schema| {
        m.insert(name, schema.to_value());
    };
    add("ApiIndex", schema_for!(ApiIndex));
    add("SchemaList", schema_for!(SchemaList));
    add("Status", schema_for!(Status));
    add("LoggingSummary", schema_for!(LoggingSummary));
    add("ExpandResponse", schema_for!(ExpandResponse));
    add("JobAccepted", schema_for!(JobAccepted));
    add("JobList", schema_for!(JobList));
    add("JobResult", schema_for!(JobResult));
    add("BanEntries", schema_for!(BanEntries));
    add("BuyableList", schema_for!(BuyableList));
    add("UploadResponse", schema_for!(UploadResponse));
    add("Error", schema_for!(ErrorBody));
    m
}
