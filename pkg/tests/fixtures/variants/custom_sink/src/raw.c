#include <node_api.h>

static napi_value Read(napi_env env, napi_callback_info info) {
  size_t argc = 1;
  napi_value argv[1];
  napi_get_cb_info(env, info, &argc, argv, NULL, NULL);
  struct handle* h = vendor_unwrap_handle(env, argv[0]);
  return vendor_read(env, h);
}

static napi_value Init(napi_env env, napi_value exports) {
  napi_property_descriptor desc = {"read", 0, Read, 0, 0, 0, napi_default, 0};
  napi_define_properties(env, exports, 1, &desc);
  return exports;
}

NAPI_MODULE(NODE_GYP_MODULE_NAME, Init)
