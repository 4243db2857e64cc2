napi_value Pad(napi_env env, napi_callback_info info) {
   napi_status status;
   size_t argc = 1, strSize;
   napi_value args[1], result;
   status = napi_get_cb_info(env, info, &argc, args, NULL, NULL);
   assert(status == napi_ok);
   napi_get_value_string_utf8(env, args[0], NULL, NULL, &strSize);
   strSize = strSize + 4;
   char myStr[strSize];
   napi_get_value_string_utf8(env, args[0], myStr, strSize, NULL);
   strcat(myStr, "pad");
   napi_create_string_utf8(env,myStr,strSize,&result);
   return result;
}
