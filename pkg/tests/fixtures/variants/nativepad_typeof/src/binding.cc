#include <assert.h>
#include <string.h>
#include <node_api.h>

#include "pad.cc"

napi_value Init(napi_env env, napi_value exports) {
  napi_property_descriptor desc[] = {
    {"Pad", NULL, Pad, NULL, NULL, NULL, napi_default, NULL},
  };
  napi_define_properties(env, exports, sizeof(desc) / sizeof(desc[0]), desc);
  return exports;
}

NAPI_MODULE(NODE_GYP_MODULE_NAME, Init)
