// entry: ReadField
// category: chained property access (N-API objects)
#include <node_api.h>

napi_value ReadField(napi_env env, napi_callback_info info) {
  size_t argc = 1;
  napi_value argv[1];
  napi_get_cb_info(env, info, &argc, argv, NULL, NULL);
  napi_value field;
  napi_get_named_property(env, argv[0], "size", &field);
  int64_t size;
  napi_get_value_int64(env, field, &size);  // sink: tainted
  napi_value out;
  napi_create_int64(env, size * 2, &out);
  return out;
}
