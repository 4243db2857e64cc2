// entry: Echo
// category: intermediary variables (N-API)
#include <node_api.h>

napi_value Echo(napi_env env, napi_callback_info info) {
  size_t argc = 1;
  napi_value argv[1];
  napi_get_cb_info(env, info, &argc, argv, NULL, NULL);
  char buf[256];
  size_t len;
  napi_get_value_string_utf8(env, argv[0], buf, sizeof(buf), &len);  // sink: tainted
  napi_value out;
  napi_create_string_utf8(env, buf, len, &out);
  return out;
}
