#pragma once

#include "clfsec/attacks.hpp"
#include "clfsec/classifiers/gamma_fusion.hpp"
#include "clfsec/classifiers/linear.hpp"
#include "clfsec/classifiers/model.hpp"
#include "clfsec/classifiers/one_class_svm.hpp"
#include "clfsec/config.hpp"
#include "clfsec/data_model.hpp"
#include "clfsec/error.hpp"
#include "clfsec/evaluation.hpp"
#include "clfsec/ingestion.hpp"
#include "clfsec/pipeline.hpp"
#include "clfsec/rng.hpp"
#include "clfsec/synthetic.hpp"
