#include <node_api.h>

napi_value Length(napi_env env, napi_callback_info info) {
  size_t argc = 1;
  napi_value args[1];
  napi_get_cb_info(env, info, &argc, args, NULL, NULL);
  void* data;
  size_t len;
  napi_get_buffer_info(env, args[0], &data, &len);
  napi_value out;
  napi_create_uint32(env, (uint32_t)len, &out);
  return out;
}

napi_value Init(napi_env env, napi_value exports) {
  napi_value fn;
  napi_create_function(env, "length", NAPI_AUTO_LENGTH, Length, NULL, &fn);
  napi_set_named_property(env, exports, "length", fn);
  return exports;
}

NAPI_MODULE(NODE_GYP_MODULE_NAME, Init)
