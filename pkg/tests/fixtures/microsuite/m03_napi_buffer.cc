// entry: Checksum
// category: different APIs (N-API buffers)
#include <node_api.h>

napi_value Checksum(napi_env env, napi_callback_info info) {
  size_t argc = 1;
  napi_value argv[1];
  napi_get_cb_info(env, info, &argc, argv, NULL, NULL);
  void* data;
  size_t length;
  napi_get_buffer_info(env, argv[0], &data, &length);  // sink: tainted
  uint32_t sum = 0;
  for (size_t i = 0; i < length; i++) {
    sum += ((uint8_t*)data)[i];
  }
  napi_value result;
  napi_create_uint32(env, sum, &result);
  return result;
}
