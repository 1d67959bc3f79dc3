#pragma once

#include "seqmtl/cli/commands.hpp"
#include "seqmtl/core/error.hpp"
#include "seqmtl/core/gradcheck.hpp"
#include "seqmtl/core/graph.hpp"
#include "seqmtl/core/matrix.hpp"
#include "seqmtl/core/random.hpp"
#include "seqmtl/data/batching.hpp"
#include "seqmtl/data/corpus.hpp"
#include "seqmtl/data/embeddings.hpp"
#include "seqmtl/data/scenarios.hpp"
#include "seqmtl/data/synthetic.hpp"
#include "seqmtl/data/tagset.hpp"
#include "seqmtl/data/union.hpp"
#include "seqmtl/eval/confusion.hpp"
#include "seqmtl/eval/curves.hpp"
#include "seqmtl/eval/mann_whitney.hpp"
#include "seqmtl/eval/metrics.hpp"
#include "seqmtl/eval/report.hpp"
#include "seqmtl/eval/selection.hpp"
#include "seqmtl/model/checkpoint.hpp"
#include "seqmtl/model/config.hpp"
#include "seqmtl/model/crf.hpp"
#include "seqmtl/model/lstm.hpp"
#include "seqmtl/model/task_model.hpp"
#include "seqmtl/optim/nadam.hpp"
#include "seqmtl/optim/search_space.hpp"
#include "seqmtl/trainer/run_record.hpp"
#include "seqmtl/trainer/schedule.hpp"
#include "seqmtl/trainer/search.hpp"
#include "seqmtl/trainer/trainer.hpp"
