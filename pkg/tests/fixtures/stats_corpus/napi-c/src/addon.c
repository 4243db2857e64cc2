#include <node_api.h>

napi_value F(napi_env env, napi_callback_info info) {
  return NULL;
}

napi_value Init(napi_env env, napi_value exports) {
  napi_property_descriptor d[] = {{"f", NULL, F, NULL, NULL, NULL, napi_default, NULL}};
  napi_define_properties(env, exports, 1, d);
  return exports;
}
