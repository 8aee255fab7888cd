#pragma once

#include "onco/axioms.hpp"
#include "onco/box.hpp"
#include "onco/cql.hpp"
#include "onco/cql_xml.hpp"
#include "onco/error.hpp"
#include "onco/mcc.hpp"
#include "onco/metrics.hpp"
#include "onco/model.hpp"
#include "onco/modext.hpp"
#include "onco/ontogen.hpp"
#include "onco/pipeline.hpp"
#include "onco/query_ast.hpp"
#include "onco/reasoner.hpp"
