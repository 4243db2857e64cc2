#include <node_api.h>

napi_value Compress(napi_env env, napi_callback_info info);
napi_value Decompress(napi_env env, napi_callback_info info);
napi_value Version(napi_env env, napi_callback_info info);

napi_value Init(napi_env env, napi_value exports) {
  napi_property_descriptor desc[] = {
    {"compress", NULL, Compress, NULL, NULL, NULL, napi_default, NULL},
    {"decompress", NULL, Decompress, NULL, NULL, NULL, napi_default, NULL},
    {"version", NULL, Version, NULL, NULL, NULL, napi_default, NULL},
  };
  napi_define_properties(env, exports, sizeof(desc) / sizeof(*desc), desc);
  return exports;
}

NAPI_MODULE(NODE_GYP_MODULE_NAME, Init)
