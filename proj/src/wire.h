// Wire-format helpers shared by the HTTP clients and servers. Private.
#ifndef CRE_SRC_WIRE_H_
#define CRE_SRC_WIRE_H_

#include <functional>
#include <string>

#include "cre/corpus.h"
#include "cre/predict.h"
#include "json_util.h"

namespace cre::internal {

// CRE record as a JSON object, in canonical field order.
OrderedJson cre_record_json(const CreRecord& record);

// POSTs `body` to endpoint + path and returns the parsed response. Network
// failures, non-2xx statuses and bodies rejected by `validate` (which throws)
// are retried up to options.max_attempts; the last failure is rethrown as
// TransportError.
Json post_json(const std::string& endpoint, const std::string& path,
               const OrderedJson& body, const RemoteOptions& options,
               const std::function<void(const Json&)>& validate);

}  // namespace cre::internal

#endif  // CRE_SRC_WIRE_H_
