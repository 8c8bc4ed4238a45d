#pragma once

#include "histql/binning.hpp"
#include "histql/db.hpp"
#include "histql/dialect.hpp"
#include "histql/error.hpp"
#include "histql/executor.hpp"
#include "histql/ingest.hpp"
#include "histql/schema.hpp"
#include "histql/sql_templates.hpp"
#include "histql/sqlgen.hpp"
#include "histql/sqlite_db.hpp"
#include "histql/value.hpp"
